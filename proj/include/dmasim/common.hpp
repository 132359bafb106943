// SPDX-License-Identifier: Apache-2.0
//
// dmasim - coupled-dipole simulation of cavity-backed dynamic metasurface antennas
// Copyright 2026 The dmasim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace dmasim {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr Complex kI{0.0, 1.0};

// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Rejection sampling could not place a scatterer.
class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

// Green's function evaluated at coincident points.
class SelfInteraction : public Error {
public:
    using Error::Error;
};

class DegenerateSystem : public Error {
public:
    using Error::Error;
};

class DegenerateRegression : public Error {
public:
    using Error::Error;
};

// Normalization of an all-zero field.
class NullPattern : public Error {
public:
    using Error::Error;
};

// Invalid configuration document; `path` is the JSON pointer of the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// 64-bit FNV-1a. Stable across platforms and runs, used for fingerprints and config hashes.
class Fnv1a {
public:
    Fnv1a& bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
        return *this;
    }
    Fnv1a& str(std::string_view s) { return bytes(s.data(), s.size()); }
    Fnv1a& f64(double v) { return bytes(&v, sizeof v); }
    Fnv1a& u64(std::uint64_t v) { return bytes(&v, sizeof v); }
    Fnv1a& cplx(Complex v) { return f64(v.real()).f64(v.imag()); }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string hex64(std::uint64_t v);

}  // namespace dmasim
