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

#include "piqec/coefficients.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "piqec/oracle.hpp"

using namespace piqec;

namespace {

// Explicit 3×3 lowering matrix of the N=2 triplet from the full space.
double triplet_lowering_element() {
  const auto basis = oracle::FullStateBasis::build(2);
  const Eigen::VectorXd top = basis.sector_columns(1, 1).col(0);
  const Eigen::VectorXd mid = basis.sector_columns(1, 0).col(0);
  return mid.dot(oracle::apply_collective(-1, 2, top));
}

}  // namespace

TEST(collective_coeff, reference_values) {
  EXPECT_EQ(collective_coeff(3, -3, -1), 0.0);
  EXPECT_EQ(collective_coeff(3, 0, 0), 0.0);
  EXPECT_NEAR(collective_coeff(1, 1, -1), triplet_lowering_element(), 1e-14);
  EXPECT_NEAR(collective_coeff(1, 1, -1), std::sqrt(2.0), 1e-14);
  EXPECT_EQ(collective_coeff(2, -1, 0), -1.0);
}

TEST(collective_coeff, superradiant_scaling) {
  for (int tj = 0; tj <= 20; ++tj) {
    const HalfInt j = HalfInt::from_twice(tj);
    for (int i = 0; i < block_dim(j); ++i) {
      const HalfInt m = level_at(j, i);
      const double x = collective_coeff(j, m, -1);
      EXPECT_NEAR(x * x, (j.value() + m.value()) * (j.value() - m.value() + 1.0), 1e-12);
    }
  }
}

TEST(individual_coeff, boundaries_and_n2_dephasing) {
  for (int i = 0; i < 5; ++i) {
    for (int m : kShifts) EXPECT_EQ(individual_coeff(4, 2, level_at(2, i), 1, m), 0.0);
  }
  // Σ_n σ_z,n |↑↑⟩ ∝ |↑↑⟩: all weight stays in the triplet.
  EXPECT_NEAR(std::pow(individual_coeff(2, 1, 1, 0, 0), 2), 2.0, 1e-12);
  EXPECT_EQ(individual_coeff(2, 1, 1, -1, 0), 0.0);
  // Σ_n σ_z,n |1,0⟩ has no triplet overlap: everything goes to the singlet.
  EXPECT_EQ(individual_coeff(2, 1, 0, 0, 0), 0.0);
  EXPECT_NEAR(std::pow(individual_coeff(2, 1, 0, -1, 0), 2), 2.0, 1e-12);
}

TEST(individual_coeff, dephasing_sign_follows_m) {
  for (int i = 0; i < 11; ++i) {
    const HalfInt m = level_at(5, i);
    const double c = individual_coeff(20, 5, m, 0, 0);
    if (m.twice() != 0) EXPECT_EQ(c > 0.0, m.twice() > 0);
  }
}

TEST(individual_coeff, proportional_to_collective_within_sector) {
  for (int n : {5, 8, 13, 20}) {
    for (int tj = n % 2; tj <= n; tj += 2) {
      const HalfInt j = HalfInt::from_twice(tj);
      for (int m : kShifts) {
        double ratio = 0.0;
        bool have = false;
        for (int i = 0; i < block_dim(j); ++i) {
          const HalfInt lvl = level_at(j, i);
          const double x = collective_coeff(j, lvl, m);
          const double c = individual_coeff(n, j, lvl, 0, m);
          if (std::abs(x) < 1e-12) {
            EXPECT_NEAR(c, 0.0, 1e-12);
            continue;
          }
          if (!have) {
            ratio = c / x;
            have = true;
          }
          EXPECT_NEAR(c, ratio * x, 1e-12) << "N=" << n << " J=" << j << " m=" << m;
        }
      }
    }
  }
}

TEST(individual_coeff, trace_preservation_sum_rule_against_oracle) {
  for (int n = 2; n <= 6; ++n) {
    const auto basis = oracle::FullStateBasis::build(n);
    for (HalfInt j : basis.j_values()) {
      for (int i = 0; i < block_dim(j); ++i) {
        const HalfInt lvl = level_at(j, i);
        for (int m : kShifts) {
          double s = 0.0;
          for (int dj : kShifts) s += std::pow(individual_coeff(n, j, lvl, dj, m), 2);
          const double w = oracle::exact_channel_weight(basis, j, lvl, {ChannelKind::kIndividual, m});
          EXPECT_NEAR(s, w, 1e-12);
        }
      }
    }
  }
}

TEST(individual_coeff, cross_weight_factorizes) {
  for (int n : {7, 12, 20}) {
    for (int tj = n % 2; tj <= n; tj += 2) {
      const HalfInt j = HalfInt::from_twice(tj);
      for (int dj : kShifts) {
        for (int m : kShifts) {
          for (int a = 0; a < block_dim(j); ++a) {
            for (int b = 0; b < block_dim(j); ++b) {
              const HalfInt ma = level_at(j, a), mb = level_at(j, b);
              EXPECT_NEAR(individual_cross_weight(n, j, ma, mb, dj, m),
                          individual_coeff(n, j, ma, dj, m) * individual_coeff(n, j, mb, dj, m), 1e-11);
            }
          }
        }
      }
    }
  }
}

TEST(loss_coeff, reference_values) {
  EXPECT_NEAR(std::pow(loss_coeff(2, 0, 0, kHalf, kHalf), 2), 0.5, 1e-15);
  EXPECT_NEAR(std::pow(loss_coeff(2, 0, 0, kHalf, -kHalf), 2), 0.5, 1e-15);
  EXPECT_EQ(loss_coeff(2, 0, 0, -kHalf, kHalf), 0.0);
  EXPECT_NEAR(loss_coeff(2, 1, 1, -kHalf, -kHalf), 1.0, 1e-15);
  EXPECT_EQ(loss_coeff(2, 1, 1, -kHalf, kHalf), 0.0);
  EXPECT_NEAR(std::pow(loss_coeff(2, 1, 0, -kHalf, kHalf), 2), 0.5, 1e-15);
  EXPECT_NEAR(std::pow(loss_coeff(2, 1, 0, -kHalf, -kHalf), 2), 0.5, 1e-15);
  EXPECT_EQ(loss_coeff(1, kHalf, kHalf, -kHalf, -kHalf), 0.0);
}

TEST(loss_coeff, normalization_for_all_levels) {
  for (int n = 2; n <= 60; ++n) {
    for (int tj = n % 2; tj <= n; tj += 2) {
      const HalfInt j = HalfInt::from_twice(tj);
      for (int i = 0; i < block_dim(j); ++i) {
        double s = 0.0;
        for (const Branch& b : loss_branches()) {
          const double x = loss_coeff(n, j, level_at(j, i), b.dj, b.dm);
          EXPECT_GE(x, 0.0);
          s += x * x;
        }
        EXPECT_NEAR(s, 1.0, 1e-12);
      }
    }
  }
}

TEST(coefficient_table, build_with_full_oracle_verification) {
  const auto start = std::chrono::steady_clock::now();
  const auto table = CoefficientTable::build(8);
  EXPECT_EQ(table.oracle_verified_up_to(), 8);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(secs, 60.0);
  EXPECT_NEAR(table.individual(8, 2, 1, -1, 0), individual_coeff(8, 2, 1, -1, 0), 1e-10);
  EXPECT_NEAR(table.loss(8, 2, 1, kHalf, -kHalf), loss_coeff(8, 2, 1, kHalf, -kHalf), 1e-10);
}

TEST(coefficient_table, errors) {
  EXPECT_THROW(CoefficientTable::build(1), std::domain_error);
  const auto table = CoefficientTable::build(6, {.oracle_cap = 3});
  EXPECT_THROW(table.individual(7, kHalf, kHalf, 0, 0), std::out_of_range);
  EXPECT_THROW(table.sector(6, kHalf), std::out_of_range);
  EXPECT_EQ(table.individual(6, 3, 3, 1, 0), 0.0);
}

TEST(coefficient_table, cache_round_trip_and_convention_guard) {
  const auto table = CoefficientTable::build(9, {.oracle_cap = 4});
  const auto path = std::filesystem::temp_directory_path() / "piqec_table_test.json";
  table.save(path);
  const auto back = CoefficientTable::load(path);
  EXPECT_EQ(back.n_max(), 9);
  for (int tj = 1; tj <= 9; tj += 2) {
    const HalfInt j = HalfInt::from_twice(tj);
    for (int i = 0; i < block_dim(j); ++i) {
      for (const Branch& b : individual_branches()) {
        EXPECT_EQ(back.coeff(9, j, level_at(j, i), b), table.coeff(9, j, level_at(j, i), b));
      }
    }
  }
  std::string text;
  {
    std::ifstream in(path);
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto pos = text.find(CoefficientTable::kConvention);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 4, "imag");
  {
    std::ofstream out(path);
    out << text;
  }
  EXPECT_THROW(CoefficientTable::load(path), TableIntegrityError);
  std::filesystem::remove(path);
}
