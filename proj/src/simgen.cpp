#include "sil/simgen.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sil {

namespace {

// Stream purposes; first path element keeps replicate streams disjoint.
enum StreamTag : std::uint64_t {
  kSupport = 1,
  kOmega = 2,
  kHet = 3,
  kDesign = 4,
  kNoise = 5,
};

}  // namespace

const char* scenario_name(Scenario sc) {
  switch (sc) {
    case Scenario::Ring: return "ring";
    case Scenario::Hub: return "hub";
    case Scenario::Random: return "random";
  }
  throw std::logic_error("unknown scenario");
}

Scenario parse_scenario(const std::string& name) {
  if (name == "ring") return Scenario::Ring;
  if (name == "hub") return Scenario::Hub;
  if (name == "random") return Scenario::Random;
  throw std::invalid_argument("unknown scenario '" + name +
                              "' (expected ring, hub, or random)");
}

void ScenarioConfig::validate() const {
  if (blocks < 1) throw std::invalid_argument("blocks must be at least 1");
  if (block_size < 2)
    throw std::invalid_argument("block_size must be at least 2");
  if (num_studies < 1)
    throw std::invalid_argument("num_studies must be at least 1");
  if (!(p_ht >= 0.0) || !(p_ht <= 1.0))
    throw std::invalid_argument("p_ht must lie in [0, 1]");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::invalid_argument("sigma2 must be positive");
  if (n_train < 1 || n_valid < 1 || n_test < 1)
    throw std::invalid_argument("split sizes must be at least 1");
  if (alpha.size() != 0 && alpha.size() != block_size)
    throw std::invalid_argument("alpha length must equal block_size");
  if (alpha.size() != 0 && !alpha.allFinite())
    throw std::invalid_argument("alpha must be finite");
}

Eigen::VectorXd default_alpha(Scenario sc, int p_B) {
  double tail = sc == Scenario::Hub ? 0.25 : 1.0 / 3.0;
  Eigen::VectorXd a = Eigen::VectorXd::Constant(p_B, tail);
  a(0) = 1.0;
  return a;
}

std::vector<std::pair<int, int>> scenario_support(Scenario sc, int p_B,
                                                  Rng& rng) {
  if (p_B < 2) throw std::invalid_argument("block size must be at least 2");
  std::vector<std::pair<int, int>> support;
  switch (sc) {
    case Scenario::Ring:
      for (int k = 1; k < p_B; ++k) support.push_back({k, k - 1});
      support.push_back({p_B - 1, 0});
      break;
    case Scenario::Hub:
      for (int k = 1; k < p_B; ++k) support.push_back({k, 0});
      break;
    case Scenario::Random:
      for (int j = 1; j < p_B; ++j)
        for (int k = 0; k < j; ++k)
          if (rng.bernoulli(3.0 / p_B)) support.push_back({j, k});
      break;
  }
  return support;
}

Eigen::MatrixXd gen_block_precision_from_support(
    const std::vector<std::pair<int, int>>& support, int p_B, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p_B, p_B);
    for (const auto& [j, k] : support) {
      if (j <= k || j >= p_B || k < 0)
        throw std::invalid_argument("support must be strictly lower triangular");
      omega(j, k) = rng.uniform(-1.5, -0.5);
    }
    omega = (omega + omega.transpose()).eval();
    for (int j = 0; j < p_B; ++j) omega(j, j) = 0.5 - omega.row(j).sum();

    Eigen::LLT<Eigen::MatrixXd> llt(omega);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd sigma =
        llt.solve(Eigen::MatrixXd::Identity(p_B, p_B));
    Eigen::VectorXd d = sigma.diagonal().cwiseSqrt();
    return d.asDiagonal() * omega * d.asDiagonal();
  }
  throw std::runtime_error(
      "no positive definite precision block after 100 redraws");
}

Eigen::MatrixXd gen_block_precision(Scenario sc, int p_B, Rng& rng) {
  std::vector<std::pair<int, int>> support = scenario_support(sc, p_B, rng);
  return gen_block_precision_from_support(support, p_B, rng);
}

Eigen::MatrixXd gen_true_beta(const ScenarioConfig& cfg,
                              const std::vector<Eigen::MatrixXd>& precisions,
                              Rng& rng) {
  cfg.validate();
  if ((int)precisions.size() != cfg.num_studies)
    throw std::invalid_argument("one precision matrix per study required");
  int p = cfg.p();
  int pb = cfg.block_size;
  Eigen::VectorXd alpha =
      cfg.alpha.size() ? cfg.alpha : default_alpha(cfg.scenario, pb);
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p, cfg.num_studies);
  for (int m = 0; m < cfg.num_studies; ++m) {
    const Eigen::MatrixXd& omega = precisions[m];
    if (omega.rows() != p || omega.cols() != p)
      throw std::invalid_argument("precision matrix has wrong shape");
    beta.block(0, m, pb, 1) = omega.topLeftCorner(pb, pb) * alpha;
    bool drop_second = rng.bernoulli(cfg.p_ht);
    if (cfg.blocks >= 2 && !drop_second)
      beta.block(pb, m, pb, 1) = omega.block(pb, pb, pb, pb) * alpha;
  }
  return beta;
}

namespace {

// Rows are x = L^{-T} z per block, so each row has covariance Omega^{-1}.
Study sample_split(const std::vector<Eigen::LLT<Eigen::MatrixXd>>& chols,
                   const Eigen::VectorXd& beta, double sigma2, int n, int p,
                   int p_B, Rng& xrng, Rng& erng) {
  Eigen::MatrixXd z(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) z(i, k) = xrng.normal();
  Study s;
  s.x.resize(n, p);
  for (size_t b = 0; b < chols.size(); ++b) {
    auto zb = z.middleCols((int)b * p_B, p_B);
    s.x.middleCols((int)b * p_B, p_B) =
        chols[b].matrixU().solve(zb.transpose()).transpose();
  }
  s.y = s.x * beta;
  double sd = std::sqrt(sigma2);
  for (int i = 0; i < n; ++i) s.y(i) += sd * erng.normal();
  return s;
}

}  // namespace

SyntheticStudy sample_study(const ScenarioConfig& cfg, int replicate) {
  cfg.validate();
  if (replicate < 0) throw std::invalid_argument("replicate must be >= 0");
  std::uint64_t rep = (std::uint64_t)replicate;
  int p = cfg.p();
  int pb = cfg.block_size;

  std::vector<std::vector<std::pair<int, int>>> supports(cfg.blocks);
  for (int b = 0; b < cfg.blocks; ++b) {
    Rng srng = Rng::stream(cfg.seed, {kSupport, rep, (std::uint64_t)b});
    supports[b] = scenario_support(cfg.scenario, pb, srng);
  }

  SyntheticStudy out;
  out.precisions.reserve(cfg.num_studies);
  for (int m = 0; m < cfg.num_studies; ++m) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
    for (int b = 0; b < cfg.blocks; ++b) {
      Rng vrng = Rng::stream(cfg.seed,
                             {kOmega, rep, (std::uint64_t)b, (std::uint64_t)m});
      omega.block(b * pb, b * pb, pb, pb) =
          gen_block_precision_from_support(supports[b], pb, vrng);
    }
    out.precisions.push_back(std::move(omega));
  }

  std::vector<std::pair<int, int>> edges;
  for (int b = 0; b < cfg.blocks; ++b)
    for (const auto& [j, k] : supports[b])
      edges.push_back({b * pb + j + 1, b * pb + k + 1});
  out.graph = PredictorGraph::from_edge_list(p, edges);

  Rng het = Rng::stream(cfg.seed, {kHet, rep});
  out.beta_true = gen_true_beta(cfg, out.precisions, het);

  for (int m = 0; m < cfg.num_studies; ++m) {
    std::vector<Eigen::LLT<Eigen::MatrixXd>> chols;
    chols.reserve(cfg.blocks);
    for (int b = 0; b < cfg.blocks; ++b) {
      chols.emplace_back(out.precisions[m].block(b * pb, b * pb, pb, pb));
      if (chols.back().info() != Eigen::Success)
        throw std::runtime_error("precision block factorization failed");
    }
    const int sizes[3] = {cfg.n_train, cfg.n_valid, cfg.n_test};
    MultiStudy* splits[3] = {&out.train, &out.validate, &out.test};
    for (int s = 0; s < 3; ++s) {
      Rng xrng = Rng::stream(cfg.seed,
                             {kDesign, rep, (std::uint64_t)m, (std::uint64_t)s});
      Rng erng = Rng::stream(cfg.seed,
                             {kNoise, rep, (std::uint64_t)m, (std::uint64_t)s});
      splits[s]->studies.push_back(sample_split(
          chols, out.beta_true.col(m), cfg.sigma2, sizes[s], p, pb, xrng, erng));
    }
  }
  return out;
}

}  // namespace sil
