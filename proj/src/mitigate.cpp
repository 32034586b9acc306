#include "thermies/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "thermies/errors.hpp"
#include "thermies/parallel.hpp"

namespace thermies {

SampleBatch thermies_univariate(double sigma2_t, double epsilon,
                                std::optional<double> w_override,
                                std::size_t n, Rng& rng) {
  if (!(epsilon > 0.0)) throw InvalidArgumentError("epsilon must be positive");
  if (!(sigma2_t > 0.0))
    throw InvalidArgumentError("target variance must be positive");
  const double q = sigma2_t / epsilon;
  double m = std::floor(q);
  double w = q - m;
  const double snap = 1e-12 * std::max(1.0, std::abs(q));
  if (w <= snap) w = 0.0;
  if (1.0 - w <= snap) {
    m += 1.0;
    w = 0.0;
  }
  if (m < 1.0)
    throw InfeasibilityError(
        "target variance below epsilon; no representable lower neighbor");
  if (w_override) {
    if (*w_override < 0.0 || *w_override > 1.0)
      throw InvalidArgumentError("weight override must lie in [0, 1]");
    w = *w_override;
  }

  SampleBatch batch;
  batch.dim = 1;
  batch.count = n;
  batch.data.resize(n);
  batch.neighbor_index.resize(n);
  const double sd_lo = std::sqrt(m * epsilon);
  const double sd_hi = std::sqrt((m + 1.0) * epsilon);
  for (std::size_t k = 0; k < n; ++k) {
    bool up = w > 0.0 && rng.bernoulli(w);
    batch.data[k] = (up ? sd_hi : sd_lo) * rng.normal();
    batch.neighbor_index[k] = up ? 1 : 0;
  }
  return batch;
}

namespace {

// Key the realized rounding by its bit pattern so repeated draws of the same
// neighbor reuse its Cholesky factor. Only possible when the pattern fits a
// word; per-sample factorization is the fallback.
std::uint64_t bits_key(const SymMatrix& bits) {
  std::uint64_t key = 0;
  int n = 0;
  for (int i = 0; i < bits.dim(); ++i)
    for (int j = i; j < bits.dim(); ++j, ++n)
      if (bits(i, j) != 0.0) key |= std::uint64_t{1} << n;
  return key;
}

}  // namespace

SampleBatch thermies_sample(const MitigationPlan& plan, std::size_t total,
                            Rng& rng) {
  const int d = plan.target.dim();
  NeighborSampler sampler(plan.target, plan.spec, plan.psd_policy);

  SampleBatch batch;
  batch.dim = d;
  batch.count = total;
  batch.seed = plan.seed;
  batch.data.resize(total * static_cast<std::size_t>(d));
  batch.neighbor_index.resize(total);

  const bool cacheable = upper_count(d) <= 63 &&
                         plan.backend == SamplerBackend::Exact;
  std::map<std::uint64_t, LowerTriangular> factor_cache;
  std::vector<double> z(d);

  for (std::size_t k = 0; k < total; ++k) {
    NeighborDraw nb = sampler.draw(rng);
    batch.neighbor_index[k] = static_cast<std::int32_t>(k);
    double* out = batch.data.data() + k * static_cast<std::size_t>(d);
    if (cacheable) {
      std::uint64_t key = bits_key(nb.bits);
      auto it = factor_cache.find(key);
      if (it == factor_cache.end())
        it = factor_cache.emplace(key, cholesky(nb.matrix)).first;
      for (int i = 0; i < d; ++i) z[i] = rng.normal();
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += it->second(i, j) * z[j];
        out[i] = s;
      }
    } else {
      Rng sub(rng.fork_seed());
      SampleBatch one =
          plan.backend == SamplerBackend::Exact
              ? sample_exact(nb.matrix, 1, sub)
              : sample_langevin(nb.matrix, 1,
                                plan.langevin
                                    ? *plan.langevin
                                    : LangevinConfig::defaults_for(nb.matrix),
                                sub);
      std::copy(one.data.begin(), one.data.end(), out);
    }
  }
  return batch;
}

RepetitionResult thermies_repetition(const MitigationPlan& plan, Rng& rng,
                                     int workers) {
  const int d = plan.target.dim();
  const std::size_t m_draws = plan.ensemble_draws;
  const std::size_t per_draw = plan.samples_per_draw;
  if (m_draws < 1 || per_draw < 1)
    throw InvalidArgumentError("plan requires M >= 1 and n >= 1");

  NeighborSampler sampler(plan.target, plan.spec, plan.psd_policy);

  // Pre-fork one stream per member so the parallel schedule cannot affect
  // the output.
  std::vector<std::uint64_t> member_seeds(m_draws);
  for (auto& s : member_seeds) s = rng.fork_seed();

  RepetitionResult result;
  result.batch.dim = d;
  result.batch.count = m_draws * per_draw;
  result.batch.seed = plan.seed;
  result.batch.data.resize(result.batch.count * static_cast<std::size_t>(d));
  result.batch.neighbor_index.resize(result.batch.count);
  result.drawn.reserve(m_draws);

  std::vector<std::optional<CovMatrix>> drawn(m_draws);

  parallel_for(m_draws, workers, [&](std::size_t m) {
    Rng sub(member_seeds[m]);
    NeighborDraw nb = sampler.draw(sub);
    SampleBatch local =
        plan.backend == SamplerBackend::Exact
            ? sample_exact(nb.matrix, per_draw, sub)
            : sample_langevin(nb.matrix, per_draw,
                              plan.langevin
                                  ? *plan.langevin
                                  : LangevinConfig::defaults_for(nb.matrix),
                              sub);
    std::size_t base = m * per_draw;
    std::copy(local.data.begin(), local.data.end(),
              result.batch.data.begin() +
                  base * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < per_draw; ++k)
      result.batch.neighbor_index[base + k] = static_cast<std::int32_t>(m);
    drawn[m] = std::move(nb.matrix);
  });

  for (auto& c : drawn) result.drawn.push_back(std::move(*c));
  return result;
}

std::vector<double> mitigated_estimate(
    const std::function<std::vector<double>(const CovMatrix&)>& g,
    const CovMatrix& target, const QuantSpec& spec, EstimateMode mode,
    std::size_t mc_draws, Rng* rng) {
  auto check_finite = [](const std::vector<double>& v,
                         const std::string& member) {
    for (double x : v)
      if (!std::isfinite(x))
        throw EvaluationError("estimate target returned a non-finite value on " +
                              member);
  };

  if (mode == EstimateMode::ExactEnumeration) {
    NeighborEnsemble ens(target, spec);
    std::vector<double> acc;
    for (std::uint64_t b = 0; b < ens.size(); ++b) {
      NeighborDraw nb = ens.member(b);
      std::vector<double> gb = g(nb.matrix);
      std::ostringstream os;
      os << "ensemble member " << b;
      check_finite(gb, os.str());
      if (acc.empty()) acc.assign(gb.size(), 0.0);
      if (gb.size() != acc.size())
        throw InvalidArgumentError("estimate target changed output size");
      for (std::size_t i = 0; i < gb.size(); ++i)
        acc[i] += *nb.weight * gb[i];
    }
    return acc;
  }

  if (mc_draws < 1 || rng == nullptr)
    throw InvalidArgumentError(
        "Monte Carlo mode requires mc_draws >= 1 and an RNG stream");
  NeighborSampler sampler(target, spec);
  std::vector<double> acc;
  for (std::size_t m = 0; m < mc_draws; ++m) {
    NeighborDraw nb = sampler.draw(*rng);
    std::vector<double> gm = g(nb.matrix);
    std::ostringstream os;
    os << "sampled member " << m;
    check_finite(gm, os.str());
    if (acc.empty()) acc.assign(gm.size(), 0.0);
    if (gm.size() != acc.size())
      throw InvalidArgumentError("estimate target changed output size");
    for (std::size_t i = 0; i < gm.size(); ++i) acc[i] += gm[i];
  }
  for (double& v : acc) v /= static_cast<double>(mc_draws);
  return acc;
}

}  // namespace thermies
