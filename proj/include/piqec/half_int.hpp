// Copyright 2026 The piqec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIQEC_HALF_INT_HPP
#define PIQEC_HALF_INT_HPP

#include <compare>
#include <cstdlib>
#include <ostream>
#include <string>

namespace piqec {

/// Integer or half-integer quantum number stored as twice its value so that
/// block keys and level indices stay exact.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int value) : twice_(2 * value) {}

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }
  static HalfInt from_double(double value);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt& operator+=(HalfInt o) {
    twice_ += o.twice_;
    return *this;
  }
  constexpr HalfInt& operator-=(HalfInt o) {
    twice_ -= o.twice_;
    return *this;
  }
  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return a += b; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return a -= b; }
  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;
  friend constexpr bool operator==(HalfInt, HalfInt) = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

inline constexpr HalfInt kHalf = HalfInt::from_twice(1);

inline std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

/// Same parity: a − b is an integer.
constexpr bool same_parity(HalfInt a, HalfInt b) { return ((a.twice() - b.twice()) % 2) == 0; }

constexpr HalfInt abs(HalfInt h) { return HalfInt::from_twice(std::abs(h.twice())); }

}  // namespace piqec

#endif  // PIQEC_HALF_INT_HPP
