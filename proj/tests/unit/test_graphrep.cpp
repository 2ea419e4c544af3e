#include <doctest.h>

#include <algorithm>
#include <random>

#include "curvy/error.hpp"
#include "curvy/graphrep.hpp"
#include "fixtures.hpp"

using namespace curvy;
using namespace curvy::graphrep;

namespace {

std::vector<std::vector<double>> sorted_rows(const RowMatrix& m) {
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.emplace_back(m.row(i).data(), m.row(i).data() + m.cols());
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

void check_structure(const CSGraph& g, std::size_t m, std::size_t k) {
  const auto n = static_cast<Eigen::Index>(m * k);
  REQUIRE(g.node_features.rows() == n);
  CHECK(g.node_features.cols() == kFeatureDim);
  CHECK(g.piece_adj == g.piece_adj.transpose());
  CHECK(g.section_adj == RowMatrix::Ones(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)));
  CHECK(g.section_count() == m);
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(g.piece_adj(i, i) == 1.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = g.piece_adj(i, j);
      CHECK((a == 0.0 || a == 1.0));
      if (a != 0.0) CHECK(g.section_membership[static_cast<std::size_t>(i)] == g.section_membership[static_cast<std::size_t>(j)]);
    }
  }
  for (int d : g.degrees()) CHECK(d == (k >= 3 ? 2 : 1));
}

}  // namespace

TEST_CASE("build_graph m=1 k=4") {
  std::mt19937_64 rng(1);
  const auto set = fixtures::random_set(1, 4, rng);
  const auto g = build_graph(set);
  check_structure(g, 1, 4);
  RowMatrix expected(4, 4);
  expected << 1, 1, 0, 1,
              1, 1, 1, 0,
              0, 1, 1, 1,
              1, 0, 1, 1;
  CHECK(g.piece_adj == expected);
  CHECK(g.section_adj == RowMatrix::Ones(1, 1));
  // four ring edges
  CHECK((g.piece_adj.sum() - 4) / 2 == 4);
}

TEST_CASE("build_graph m=2 k=3 is block diagonal") {
  std::mt19937_64 rng(2);
  const auto g = build_graph(fixtures::random_set(2, 3, rng));
  check_structure(g, 2, 3);
  CHECK(g.piece_adj.topRightCorner(3, 3).isZero());
  CHECK(g.piece_adj.bottomLeftCorner(3, 3).isZero());
  CHECK(g.piece_adj.topLeftCorner(3, 3) == RowMatrix::Ones(3, 3));
  CHECK(g.section_membership == std::vector<int>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("build_graph m=1 k=2 degenerate ring") {
  std::mt19937_64 rng(3);
  const auto g = build_graph(fixtures::random_set(1, 2, rng));
  check_structure(g, 1, 2);
  CHECK(g.piece_adj == RowMatrix::Ones(2, 2));
}

TEST_CASE("node features flatten coefficients power-major") {
  std::mt19937_64 rng(4);
  const auto set = fixtures::random_set(3, 5, rng);
  const auto g = build_graph(set);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t j = 0; j < 5; ++j) {
      const auto& c = set.sections[s].pieces[j].coeffs;
      const auto row = static_cast<Eigen::Index>(s * 5 + j);
      for (int p = 0; p < 6; ++p) {
        for (int d = 0; d < 3; ++d) CHECK(g.node_features(row, 3 * p + d) == c(p, d));
      }
    }
  }
}

TEST_CASE("build_graph structure over many sizes") {
  std::mt19937_64 rng(5);
  for (std::size_t m = 1; m <= 6; ++m) {
    for (std::size_t k = 2; k <= 9; ++k) check_structure(build_graph(fixtures::random_set(m, k, rng)), m, k);
  }
}

TEST_CASE("permute_graph identity is bit-identical") {
  std::mt19937_64 rng(6);
  const auto g = build_graph(fixtures::random_set(3, 4, rng));
  const auto p = permute_graph(g, {0, 1, 2}, {0, 0, 0});
  CHECK(p.node_features == g.node_features);
  CHECK(p.piece_adj == g.piece_adj);
  CHECK(p.section_adj == g.section_adj);
  CHECK(p.section_membership == g.section_membership);
}

TEST_CASE("permute_graph swap conjugates the adjacency") {
  std::mt19937_64 rng(7);
  const auto g = build_graph(fixtures::random_set(2, 3, rng));
  const auto p = permute_graph(g, {1, 0}, {0, 0});
  CHECK(p.node_features.topRows(3) == g.node_features.bottomRows(3));
  CHECK(p.node_features.bottomRows(3) == g.node_features.topRows(3));
  // P A P^T with P the block swap
  RowMatrix perm = RowMatrix::Zero(6, 6);
  const auto order = permutation_node_order(g, {1, 0}, {0, 0});
  for (std::size_t i = 0; i < 6; ++i) perm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(order[i])) = 1.0;
  CHECK(p.piece_adj == perm * g.piece_adj * perm.transpose());
}

TEST_CASE("permute_graph shift keeps the ring") {
  std::mt19937_64 rng(8);
  const auto g = build_graph(fixtures::random_set(1, 4, rng));
  const auto p = permute_graph(g, {0}, {1});
  CHECK(p.degrees() == g.degrees());
  CHECK(p.piece_adj == g.piece_adj);  // a shifted 4-ring is the same ring
  CHECK(p.node_features.row(0) == g.node_features.row(1));
}

TEST_CASE("permute_graph invariants on random relabelings") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + rng() % 7;
    const std::size_t k = 2 + rng() % 7;
    const auto g = build_graph(fixtures::random_set(m, k, rng));
    const auto perm = fixtures::random_permutation(m, rng);
    std::vector<std::size_t> shifts(m);
    for (auto& s : shifts) s = rng() % k;
    const auto p = permute_graph(g, perm, shifts);
    CHECK(sorted(p.degrees()) == sorted(g.degrees()));
    CHECK(sorted_rows(p.node_features) == sorted_rows(g.node_features));
    check_structure(p, m, k);
    // consistent relabeling: features follow the node order
    const auto order = permutation_node_order(g, perm, shifts);
    CHECK(permute_rows(g.node_features, order) == p.node_features);
    for (std::size_t i = 0; i < m * k; ++i) {
      for (std::size_t j = 0; j < m * k; ++j) {
        CHECK(p.piece_adj(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
              g.piece_adj(static_cast<Eigen::Index>(order[i]), static_cast<Eigen::Index>(order[j])));
      }
    }
  }
}

TEST_CASE("permute_graph rejects bad permutations") {
  std::mt19937_64 rng(10);
  const auto g = build_graph(fixtures::random_set(3, 3, rng));
  CHECK_THROWS_AS(permute_graph(g, {0, 1}, {0, 0}), DataError);
  CHECK_THROWS_AS(permute_graph(g, {0, 0, 1}, {0, 0, 0}), DataError);
  CHECK_THROWS_AS(permute_graph(g, {0, 1, 2}, {0, 0}), DataError);
}

TEST_CASE("build_graph rejects an invalid set") {
  CHECK_THROWS_AS(build_graph(splitfit::CrossSectionSet{}), DataError);
}
