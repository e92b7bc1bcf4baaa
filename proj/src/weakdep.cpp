#include "homog/weakdep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "homog/parallel.hpp"
#include "homog/stats.hpp"

namespace homog {
namespace {

void require_arity(int arity) {
  if (arity < 1) throw std::invalid_argument("functional arity must be >= 1");
}

/// Interval for |m| given an interval [lo, hi] for m.
ConfidenceInterval abs_interval(double lo, double hi) {
  if (lo <= 0.0 && hi >= 0.0) return {0.0, std::max(-lo, hi)};
  return {std::min(std::abs(lo), std::abs(hi)), std::max(std::abs(lo), std::abs(hi))};
}

struct DeltaSummary {
  double mean = 0.0;
  double se = 0.0;
  ConfidenceInterval ci;
};

DeltaSummary summarize_differences(std::span<const double> d, std::uint64_t seed) {
  DeltaSummary s;
  s.mean = mean_of(d);
  s.se = batched_standard_error(d);
  const ConfidenceInterval ci = bootstrap_mean_ci(d, [](double x) { return x; }, {.seed = seed});
  s.ci = abs_interval(std::min(ci.low, s.mean), std::max(ci.high, s.mean));
  return s;
}

}  // namespace

Functional Functional::tanh_product(int arity) {
  require_arity(arity);
  Functional f;
  f.kind_ = FunctionalKind::ProductOfBoundedLipschitz;
  f.arity_ = arity;
  f.sup_bound_ = 1.0;
  f.lipschitz_bound_ = 1.0;
  return f;
}

Functional Functional::power_of_sum(int arity, double p, double radius) {
  require_arity(arity);
  if (!(p >= 1.0)) throw std::invalid_argument("power_of_sum: p must be >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("power_of_sum: radius must be > 0");
  Functional f;
  f.kind_ = FunctionalKind::PowerOfSum;
  f.arity_ = arity;
  f.p_ = p;
  f.radius_ = radius;
  const double kr = arity * radius;
  f.sup_bound_ = std::pow(kr, p);
  f.lipschitz_bound_ = p * std::pow(kr, p - 1.0);
  return f;
}

Functional Functional::product_of(std::vector<HolderObservable> factors, int split) {
  const int q = static_cast<int>(factors.size());
  if (q < 2) throw std::invalid_argument("product_of: need at least 2 factors");
  if (split < 1 || split >= q) throw std::invalid_argument("product_of: split must satisfy 0 < p < q");
  Functional f;
  f.kind_ = FunctionalKind::ProductOfObservables;
  f.arity_ = q;
  f.split_ = split;
  // Sup and Lipschitz constants of each factor from a fine grid on [0,1].
  constexpr int kGrid = 4096;
  std::vector<double> sups, lips;
  for (const auto& v : factors) {
    double sup = 0.0, lip = 0.0, prev = v(0.0);
    for (int i = 0; i <= kGrid; ++i) {
      const double val = v(static_cast<double>(i) / kGrid);
      sup = std::max(sup, std::abs(val));
      if (i > 0) lip = std::max(lip, std::abs(val - prev) * kGrid);
      prev = val;
    }
    sups.push_back(sup);
    lips.push_back(lip);
  }
  f.sup_bound_ = std::accumulate(sups.begin(), sups.end(), 1.0, std::multiplies<>());
  for (int i = 0; i < q; ++i) {
    f.lipschitz_bound_ = std::max(f.lipschitz_bound_, lips[i] * f.sup_bound_ / std::max(sups[i], 1e-300));
  }
  f.factors_ = std::move(factors);
  return f;
}

Functional Functional::user(int arity, std::function<double(std::span<const double>)> fn,
                            double sup_bound, double lipschitz_bound, int split) {
  require_arity(arity);
  if (!fn) throw std::invalid_argument("user functional: empty function");
  if (!std::isfinite(sup_bound) || !std::isfinite(lipschitz_bound)) {
    throw std::invalid_argument("user functional: bounds must be finite");
  }
  Functional f;
  f.kind_ = FunctionalKind::UserDefined;
  f.arity_ = arity;
  f.fn_ = std::move(fn);
  f.sup_bound_ = sup_bound;
  f.lipschitz_bound_ = lipschitz_bound;
  f.split_ = split;
  return f;
}

std::string Functional::describe() const {
  std::ostringstream s;
  switch (kind_) {
    case FunctionalKind::ProductOfBoundedLipschitz: s << "prod tanh(y_i), k=" << arity_; break;
    case FunctionalKind::PowerOfSum: s << "|sum y_i|^" << p_ << " on [-" << radius_ << "," << radius_ << "]^" << arity_; break;
    case FunctionalKind::ProductOfObservables: {
      s << "prod";
      for (const auto& v : factors_) s << " [" << v.describe() << "]";
      s << ", split " << split_;
      break;
    }
    case FunctionalKind::UserDefined: s << "user, k=" << arity_; break;
  }
  return s.str();
}

double Functional::operator()(std::span<const double> y) const {
  if (static_cast<int>(y.size()) != arity_) throw std::invalid_argument("functional: wrong arity");
  switch (kind_) {
    case FunctionalKind::ProductOfBoundedLipschitz: {
      double out = 1.0;
      for (double t : y) out *= std::tanh(t);
      return out;
    }
    case FunctionalKind::PowerOfSum: {
      double s = 0.0;
      for (double t : y) s += std::clamp(t, -radius_, radius_);
      return std::pow(std::abs(s), p_);
    }
    case FunctionalKind::ProductOfObservables: {
      double out = 1.0;
      for (int i = 0; i < arity_; ++i) out *= factors_[static_cast<std::size_t>(i)](y[static_cast<std::size_t>(i)]);
      return out;
    }
    case FunctionalKind::UserDefined: return fn_(y);
  }
  return 0.0;
}

double Functional::at_points(std::span<const Point> y) const {
  if (static_cast<int>(y.size()) != arity_) throw std::invalid_argument("functional: wrong arity");
  if (kind_ == FunctionalKind::ProductOfObservables) {
    double out = 1.0;
    for (int i = 0; i < arity_; ++i) out *= factors_[static_cast<std::size_t>(i)](y[static_cast<std::size_t>(i)]);
    return out;
  }
  std::vector<double> xs(y.size());
  std::transform(y.begin(), y.end(), xs.begin(), [](const Point& p) { return p.x(); });
  return (*this)(xs);
}

std::vector<double> block_rvs(const MapSystem& map, const HolderObservable& v,
                              const BlockScheme& scheme, const Point& start) {
  std::vector<double> out(static_cast<std::size_t>(scheme.k()), 0.0);
  Point x = start;
  std::int64_t t = 0;
  for (std::int64_t i = 0; i < scheme.k(); ++i) {
    for (; t < scheme.lower(i); ++t) x = map.step(x);
    double s = 0.0;
    for (; t <= scheme.upper(i); ++t) {
      s += v(x);
      x = map.step(x);
    }
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

std::vector<double> independent_copies(const MapSystem& map, const HolderObservable& v,
                                       const BlockScheme& scheme, Rng& rng,
                                       std::optional<std::size_t> burn_in) {
  std::vector<double> out(static_cast<std::size_t>(scheme.k()), 0.0);
  for (std::int64_t i = 0; i < scheme.k(); ++i) {
    OrbitStream s(map, rng, burn_in);
    double acc = 0.0;
    for (std::int64_t t = 0; t < scheme.block_length(i); ++t) {
      acc += v(s.current());
      s.advance();
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

WeakdepReport weakdep_gap_experiment(const MapSystem& map, const HolderObservable& v,
                                     const Functional& f, std::span<const std::int64_t> ns,
                                     std::int64_t k, const WeakdepMc& mc) {
  if (ns.empty()) return {};
  if (f.arity() != k) throw std::invalid_argument("weakdep: functional arity must equal k");
  if (mc.trials < 100) throw std::invalid_argument("weakdep: trials must be >= 100");
  if (mc.trials_per_stream < 1) throw std::invalid_argument("weakdep: trials_per_stream must be >= 1");
  std::vector<BlockScheme> schemes;
  for (std::int64_t n : ns) schemes.push_back(block_partition(n, k));
  const std::int64_t n_max = *std::max_element(ns.begin(), ns.end());
  std::int64_t len_max = 0;
  for (const auto& s : schemes) {
    for (std::int64_t i = 0; i < k; ++i) len_max = std::max(len_max, s.block_length(i));
  }
  if (static_cast<std::size_t>(n_max) * mc.trials_per_stream > kMaxStreamLength) {
    throw std::invalid_argument("weakdep: trials_per_stream * max n exceeds the stream length limit");
  }
  const std::size_t nn = ns.size();
  const std::size_t per = mc.trials_per_stream;
  const std::size_t groups = (mc.trials + per - 1) / per;
  const std::size_t chunks = std::min<std::size_t>(groups, 256);

  struct Part {
    std::vector<double> dyn;  // trial-major, nn per trial
    std::vector<double> ind;
  };
  auto parts = map_chunks<Part>(chunks, [&](std::size_t c) {
    const IndexRange r = split_range(groups, chunks, c);
    Part out;
    std::vector<double> prefix(static_cast<std::size_t>(n_max) + 1);
    std::vector<std::vector<double>> ind_prefix(static_cast<std::size_t>(k),
                                                std::vector<double>(static_cast<std::size_t>(len_max) + 1));
    std::vector<double> x(static_cast<std::size_t>(k)), xh(static_cast<std::size_t>(k));
    for (std::size_t g = r.begin; g < r.end; ++g) {
      std::vector<Rng> rngs;
      for (std::int64_t j = 0; j <= k; ++j) rngs.push_back(make_rng(mc.seed, g, static_cast<std::uint64_t>(j)));
      OrbitStream dyn(map, rngs[0], mc.burn_in);
      std::vector<OrbitStream> copies;
      for (std::int64_t j = 0; j < k; ++j) copies.emplace_back(map, rngs[static_cast<std::size_t>(j + 1)], mc.burn_in);
      const std::size_t used = std::min(per, mc.trials - g * per);
      for (std::size_t t = 0; t < used; ++t) {
        for (std::int64_t i = 0; i < n_max; ++i) {
          prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + v(dyn.current());
          dyn.advance();
        }
        for (std::int64_t j = 0; j < k; ++j) {
          auto& pj = ind_prefix[static_cast<std::size_t>(j)];
          auto& s = copies[static_cast<std::size_t>(j)];
          for (std::int64_t i = 0; i < len_max; ++i) {
            pj[static_cast<std::size_t>(i + 1)] = pj[static_cast<std::size_t>(i)] + v(s.current());
            s.advance();
          }
        }
        for (std::size_t m = 0; m < nn; ++m) {
          const BlockScheme& s = schemes[m];
          for (std::int64_t i = 0; i < k; ++i) {
            const auto lo = static_cast<std::size_t>(s.lower(i));
            const auto hi = static_cast<std::size_t>(s.upper(i) + 1);
            x[static_cast<std::size_t>(i)] = prefix[hi] - prefix[lo];
            xh[static_cast<std::size_t>(i)] =
                ind_prefix[static_cast<std::size_t>(i)][static_cast<std::size_t>(s.block_length(i))];
          }
          out.dyn.push_back(f(x));
          out.ind.push_back(f(xh));
        }
      }
    }
    return out;
  });

  WeakdepReport report;
  std::vector<double> dyn_col, ind_col, diff;
  for (std::size_t m = 0; m < nn; ++m) {
    dyn_col.clear();
    ind_col.clear();
    diff.clear();
    for (const Part& p : parts) {
      for (std::size_t t = m; t < p.dyn.size(); t += nn) {
        dyn_col.push_back(p.dyn[t]);
        ind_col.push_back(p.ind[t]);
        diff.push_back(p.dyn[t] - p.ind[t]);
      }
    }
    WeakdepRow row;
    row.n = ns[m];
    row.k = k;
    row.gap = ns[m] / (2 * k);
    row.mean_dynamic = mean_of(dyn_col);
    row.mean_independent = mean_of(ind_col);
    const DeltaSummary s = summarize_differences(diff, mc.seed + m);
    row.delta = std::abs(s.mean);
    row.std_error = s.se;
    row.ci_low = s.ci.low;
    row.ci_high = s.ci.high;
    row.below_noise = row.delta < 2.0 * row.std_error;
    report.rows.push_back(row);
  }
  for (const auto& row : report.rows) {
    if (row.below_noise && (!report.horizon || row.gap < *report.horizon)) report.horizon = row.gap;
  }
  return report;
}

std::vector<std::vector<std::int64_t>> fcb_gap_times(std::span<const std::int64_t> head,
                                                     std::span<const std::int64_t> tail,
                                                     std::span<const std::int64_t> gaps) {
  if (head.empty() || tail.empty()) throw std::invalid_argument("fcb_gap_times: empty head or tail");
  std::vector<std::vector<std::int64_t>> out;
  for (std::int64_t g : gaps) {
    if (g < 0) throw std::invalid_argument("fcb_gap_times: negative gap");
    std::vector<std::int64_t> t(head.begin(), head.end());
    for (std::int64_t s : tail) t.push_back(head.back() + g + (s - tail.front()));
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<FcbEstimate> fcb_functional_experiment(const MapSystem& map, const Functional& g,
                                                   std::span<const std::vector<std::int64_t>> times,
                                                   const FcbMc& mc) {
  if (times.empty()) return {};
  const int q = g.arity();
  const int p = g.split();
  if (q < 2) throw std::invalid_argument("fcb: arity q must be >= 2");
  if (p < 1 || p >= q) throw std::invalid_argument("fcb: split must satisfy 0 < p < q");
  if (mc.pairs < 2) throw std::invalid_argument("fcb: need at least 2 stream pairs");
  if (mc.window < 1 || mc.windows_per_stream < 1) throw std::invalid_argument("fcb: empty window");
  std::int64_t span_max = 0;
  for (const auto& t : times) {
    if (static_cast<int>(t.size()) != q) throw std::invalid_argument("fcb: time vector length must equal q");
    if (t.front() < 0 || !std::is_sorted(t.begin(), t.end())) {
      throw std::invalid_argument("fcb: times must satisfy 0 <= n_0 <= ... <= n_{q-1}");
    }
    span_max = std::max(span_max, t.back());
  }
  const std::size_t buffer = mc.window + static_cast<std::size_t>(span_max);
  if (buffer * mc.windows_per_stream > kMaxStreamLength) {
    throw std::invalid_argument("fcb: windows exceed the stream length limit");
  }
  const std::size_t nt = times.size();
  const bool product = g.kind() == FunctionalKind::ProductOfObservables;
  const std::size_t chunks = std::min<std::size_t>(mc.pairs, 256);

  // Per pair: time-averaged single and split values for every time vector.
  auto parts = map_chunks<std::vector<double>>(chunks, [&](std::size_t c) {
    const IndexRange r = split_range(mc.pairs, chunks, c);
    std::vector<double> out;
    std::vector<Point> pa(buffer), pb(buffer);
    std::vector<std::vector<double>> fa(static_cast<std::size_t>(q), std::vector<double>(buffer));
    std::vector<std::vector<double>> fb = fa;
    std::vector<Point> args(static_cast<std::size_t>(q));
    for (std::size_t pair = r.begin; pair < r.end; ++pair) {
      Rng ra = make_rng(mc.seed, pair, 0);
      Rng rb = make_rng(mc.seed, pair, 1);
      OrbitStream sa(map, ra, mc.burn_in);
      OrbitStream sb(map, rb, mc.burn_in);
      std::vector<double> single(nt, 0.0), split(nt, 0.0);
      for (std::size_t wdx = 0; wdx < mc.windows_per_stream; ++wdx) {
        for (std::size_t i = 0; i < buffer; ++i) {
          pa[i] = sa.current();
          pb[i] = sb.current();
          sa.advance();
          sb.advance();
        }
        if (product) {
          for (int j = 0; j < q; ++j) {
            const auto& f = g.factors()[static_cast<std::size_t>(j)];
            for (std::size_t i = 0; i < buffer; ++i) {
              fa[static_cast<std::size_t>(j)][i] = f(pa[i]);
              fb[static_cast<std::size_t>(j)][i] = f(pb[i]);
            }
          }
        }
        for (std::size_t m = 0; m < nt; ++m) {
          const auto& tm = times[m];
          double s1 = 0.0, s2 = 0.0;
          for (std::size_t t = 0; t < mc.window; ++t) {
            if (product) {
              double aa = 1.0, bb = 1.0, ab = 1.0, ba = 1.0;
              for (int j = 0; j < q; ++j) {
                const std::size_t at = t + static_cast<std::size_t>(tm[static_cast<std::size_t>(j)]);
                const double xa = fa[static_cast<std::size_t>(j)][at];
                const double xb = fb[static_cast<std::size_t>(j)][at];
                aa *= xa;
                bb *= xb;
                ab *= j < p ? xa : xb;
                ba *= j < p ? xb : xa;
              }
              s1 += aa + bb;
              s2 += ab + ba;
            } else {
              for (int j = 0; j < q; ++j) args[static_cast<std::size_t>(j)] = pa[t + static_cast<std::size_t>(tm[static_cast<std::size_t>(j)])];
              s1 += g.at_points(args);
              for (int j = p; j < q; ++j) args[static_cast<std::size_t>(j)] = pb[t + static_cast<std::size_t>(tm[static_cast<std::size_t>(j)])];
              s2 += g.at_points(args);
              for (int j = 0; j < q; ++j) args[static_cast<std::size_t>(j)] = pb[t + static_cast<std::size_t>(tm[static_cast<std::size_t>(j)])];
              s1 += g.at_points(args);
              for (int j = p; j < q; ++j) args[static_cast<std::size_t>(j)] = pa[t + static_cast<std::size_t>(tm[static_cast<std::size_t>(j)])];
              s2 += g.at_points(args);
            }
          }
          single[m] += s1;
          split[m] += s2;
        }
      }
      const double norm = 2.0 * static_cast<double>(mc.window * mc.windows_per_stream);
      for (std::size_t m = 0; m < nt; ++m) {
        out.push_back(single[m] / norm);
        out.push_back(split[m] / norm);
      }
    }
    return out;
  });

  std::vector<FcbEstimate> out;
  std::vector<double> single_col, split_col, diff;
  for (std::size_t m = 0; m < nt; ++m) {
    single_col.clear();
    split_col.clear();
    diff.clear();
    for (const auto& part : parts) {
      for (std::size_t i = 2 * m; i < part.size(); i += 2 * nt) {
        single_col.push_back(part[i]);
        split_col.push_back(part[i + 1]);
        diff.push_back(part[i] - part[i + 1]);
      }
    }
    FcbEstimate e;
    e.times = times[m];
    e.gap = e.times[static_cast<std::size_t>(p)] - e.times[static_cast<std::size_t>(p - 1)];
    e.single = mean_of(single_col);
    e.split = mean_of(split_col);
    const DeltaSummary s = summarize_differences(diff, mc.seed + m);
    e.delta = std::abs(s.mean);
    e.std_error = s.se;
    e.ci_low = s.ci.low;
    e.ci_high = s.ci.high;
    e.below_noise = e.delta < 2.0 * e.std_error;
    out.push_back(std::move(e));
  }
  return out;
}

FcbEstimate fcb_functional_experiment(const MapSystem& map, const Functional& g,
                                      std::span<const std::int64_t> times, const FcbMc& mc) {
  const std::vector<std::vector<std::int64_t>> one{std::vector<std::int64_t>(times.begin(), times.end())};
  return fcb_functional_experiment(map, g, std::span<const std::vector<std::int64_t>>(one), mc).front();
}

LipschitzCheck lipschitz_check(const Functional& f, double radius, std::size_t pairs,
                               std::uint64_t seed) {
  if (!(radius > 0.0)) throw std::invalid_argument("lipschitz_check: radius must be > 0");
  const auto k = static_cast<std::size_t>(f.arity());
  Rng rng = make_rng(seed, 0x11b);
  std::uniform_real_distribution<double> box(-radius, radius);
  std::vector<double> y(k), z(k);
  LipschitzCheck out;
  out.pairs = pairs;
  // Bounds are compared with a relative allowance of a few ulps for rounding in F itself.
  const double sup_cap = f.sup_bound() * (1.0 + 1e-12);
  const double lip_cap = f.lipschitz_bound() * (1.0 + 1e-9);
  for (std::size_t i = 0; i < pairs; ++i) {
    for (auto& t : y) t = box(rng);
    if (i % 2 == 0) {
      for (auto& t : z) t = box(rng);
    } else {
      const double scale = radius * std::pow(10.0, -1.0 - 4.0 * uniform01(rng));
      for (std::size_t j = 0; j < k; ++j) z[j] = std::clamp(y[j] + scale * (2.0 * uniform01(rng) - 1.0), -radius, radius);
    }
    const double fy = f(y);
    const double fz = f(z);
    double dist = 0.0;
    for (std::size_t j = 0; j < k; ++j) dist += std::abs(y[j] - z[j]);
    const double mx = std::max(std::abs(fy), std::abs(fz));
    out.max_abs = std::max(out.max_abs, mx);
    if (mx > sup_cap) ++out.sup_violations;
    if (dist > 0.0) {
      const double quotient = std::abs(fy - fz) / dist;
      out.max_quotient = std::max(out.max_quotient, quotient);
      if (quotient > lip_cap) ++out.lipschitz_violations;
    }
  }
  return out;
}

}  // namespace homog
