#include "hgnids/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "hgnids/error.hpp"
#include "hgnids/rng.hpp"
#include "hgnids/text.hpp"

namespace hgnids {

NormalizationParams NormalizationParams::fit(std::span<const FeatureVector> rows) {
  if (rows.empty()) throw DataError("normalization: no rows");
  NormalizationParams p;
  p.min.fill(INFINITY);
  p.max.fill(-INFINITY);
  for (const auto& r : rows) {
    if (r.mode != FeatureMode::NRF) throw UsageError("normalization expects NRF rows");
    for (std::size_t f = 0; f < kNrfWidth; ++f) {
      p.min[f] = std::min(p.min[f], r.values[f]);
      p.max[f] = std::max(p.max[f], r.values[f]);
    }
  }
  return p;
}

std::array<double, kNrfWidth> NormalizationParams::forward(std::span<const double> x) const {
  if (x.size() != kNrfWidth) throw UsageError("normalization expects 9 values");
  std::array<double, kNrfWidth> z{};
  for (std::size_t f = 0; f < kNrfWidth; ++f) {
    const double range = max[f] - min[f];
    z[f] = range > 0.0 ? std::clamp((x[f] - min[f]) / range, 0.0, 1.0) : 0.0;
  }
  return z;
}

std::array<double, kNrfWidth> NormalizationParams::inverse(std::span<const double> z) const {
  if (z.size() != kNrfWidth) throw UsageError("normalization expects 9 values");
  std::array<double, kNrfWidth> x{};
  for (std::size_t f = 0; f < kNrfWidth; ++f) {
    x[f] = std::clamp(min[f] + std::clamp(z[f], 0.0, 1.0) * (max[f] - min[f]), min[f], max[f]);
  }
  return x;
}

FeatureVector NormalizationParams::forward(const FeatureVector& row) const {
  FeatureVector out = row;
  const auto z = forward(std::span<const double>(row.values));
  out.values.assign(z.begin(), z.end());
  return out;
}

void NormalizationParams::save(std::ostream& out) const {
  out << "feature,min,max\n";
  const auto names = feature_names(FeatureMode::NRF);
  for (std::size_t f = 0; f < kNrfWidth; ++f) {
    out << names[f] << ',' << text::format_double(min[f]) << ',' << text::format_double(max[f]) << '\n';
  }
}

NormalizationParams NormalizationParams::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("normalization file: missing header");
  NormalizationParams p;
  for (std::size_t f = 0; f < kNrfWidth; ++f) {
    if (!std::getline(in, line)) throw DataError("normalization file: too few rows");
    const auto parts = text::split(text::trim(line), ',');
    if (parts.size() != 3) throw DataError("normalization file: malformed row");
    const auto lo = text::parse_double(parts[1]);
    const auto hi = text::parse_double(parts[2]);
    if (!lo || !hi || !(*lo <= *hi)) throw DataError("normalization file: bad bounds");
    p.min[f] = *lo;
    p.max[f] = *hi;
  }
  return p;
}

double Substitute::score(std::span<const double> raw_nrf) const {
  const auto z = norm.forward(raw_nrf);
  return model.predict_proba(std::span<const double>(z));
}

Substitute fit_substitute(std::span<const FeatureVector> rows, std::uint64_t seed,
                          const TreeParams& params) {
  Substitute s;
  s.norm = NormalizationParams::fit(rows);
  std::vector<FeatureVector> scaled;
  scaled.reserve(rows.size());
  for (const auto& r : rows) scaled.push_back(s.norm.forward(r));
  TreeParams p = params;
  p.seed = seed;
  s.model = train(scaled, ModelKind::GradientBoosted, p);
  return s;
}

double estimate_partial(const Scorer& f, std::span<const double> x, std::size_t i, double h) {
  std::vector<double> probe(x.begin(), x.end());
  const double hi = std::min(1.0, x[i] + h);
  const double lo = std::max(0.0, x[i] - h);
  probe[i] = hi;
  const double f_hi = f(probe);
  probe[i] = lo;
  const double f_lo = f(probe);
  return hi > lo ? (f_hi - f_lo) / (hi - lo) : 0.0;
}

ZooResult zoo_attack(const Scorer& f, std::span<const double> x, const ZooBudget& budget,
                     std::uint64_t seed, std::span<const std::size_t> frozen) {
  if (!(budget.h > 0.0) || !(budget.step >= 0.0)) throw UsageError("zoo: h must be positive, step non-negative");
  ZooResult res;
  res.x.assign(x.begin(), x.end());
  for (double& v : res.x) v = std::clamp(v, 0.0, 1.0);
  res.initial_score = f(res.x);
  res.final_score = res.initial_score;

  std::vector<std::size_t> coords;
  for (std::size_t i = 0; i < res.x.size(); ++i) {
    if (std::find(frozen.begin(), frozen.end(), i) == frozen.end()) coords.push_back(i);
  }
  if (coords.empty() || budget.per_coord_batch == 0) return res;

  Rng rng(seed);
  std::vector<double> recent(res.x.size(), 0.0);
  std::vector<double> weights(coords.size());
  const std::size_t batch = std::min(budget.per_coord_batch, coords.size());

  while (res.iterations < budget.max_iters && res.final_score >= 0.5) {
    ++res.iterations;
    // Importance weights: recent |g| plus a floor so every coordinate keeps
    // some chance of being probed.
    double top = 0.0;
    for (auto c : coords) top = std::max(top, recent[c]);
    for (std::size_t j = 0; j < coords.size(); ++j) weights[j] = recent[coords[j]] + 0.1 * top + 1e-12;
    std::vector<std::size_t> chosen;
    for (std::size_t b = 0; b < batch; ++b) {
      double sum = 0.0;
      for (double w : weights) sum += w;
      double u = rng.uniform() * sum;
      std::size_t j = 0;
      while (j + 1 < weights.size() && (u -= weights[j]) >= 0.0) ++j;
      while (weights[j] == 0.0) j = (j + 1) % weights.size();
      chosen.push_back(coords[j]);
      weights[j] = 0.0;
    }
    for (auto c : chosen) {
      const double g = estimate_partial(f, res.x, c, budget.h);
      res.query_count += 2;
      recent[c] = std::fabs(g);
      if (g != 0.0) res.x[c] = std::clamp(res.x[c] - budget.step * (g > 0.0 ? 1.0 : -1.0), 0.0, 1.0);
    }
    res.final_score = f(res.x);
  }
  res.stalled = res.iterations >= budget.max_iters && res.final_score == res.initial_score;
  return res;
}

ZooResult zoo_attack(const TreeModel& model, std::span<const double> x_norm, const ZooBudget& budget,
                     std::uint64_t seed) {
  if (model.mode() != FeatureMode::NRF) throw UsageError("zoo attack targets NRF models");
  const Scorer f = [&model](std::span<const double> z) { return model.predict_proba(z); };
  const std::array<std::size_t, 1> frozen{0};  // protocol is categorical
  return zoo_attack(f, x_norm, budget, seed, frozen);
}

std::string_view to_string(AdvIpMode mode) { return mode == AdvIpMode::Fresh ? "fresh" : "parent"; }

AdvIpMode parse_adv_ip_mode(std::string_view text) {
  const std::string t = text::to_lower(text::trim(text));
  if (t == "fresh") return AdvIpMode::Fresh;
  if (t == "parent") return AdvIpMode::Parent;
  throw UsageError("unknown adversarial ip mode '" + std::string(text) + "' (expected fresh or parent)");
}

GenerationResult generate_examples(std::span<const FlowRecord> parents, const Substitute& substitute,
                                   const GenerationOptions& options, std::uint64_t seed) {
  if (parents.empty()) throw DataError("adversarial generation: no input rows");
  GenerationResult out;
  for (std::size_t i = 0; i < parents.size(); ++i) {
    const FlowRecord& parent = parents[i];
    if (!parent.label.is_attack()) continue;
    ++out.generated;
    const auto raw = nrf_values(parent);
    const auto z = substitute.norm.forward(std::span<const double>(raw));
    const ZooResult zr = zoo_attack(substitute.model, z, options.budget, derive_seed(seed, i));

    auto adv = substitute.norm.inverse(zr.x);
    adv[0] = raw[0];
    for (double& v : adv) v = std::max(v, 0.0);
    const double score = substitute.score(adv);
    if (!(score >= options.keep_threshold)) continue;

    AdversarialExample ex;
    ex.record = parent;
    set_nrf_values(ex.record, adv);
    ex.record.label = ActivityLabel::port_scan();
    if (options.ip_mode == AdvIpMode::Fresh) {
      ex.record.src_ip = kAdversarialPair.first;
      ex.record.dst_ip = kAdversarialPair.second;
    }
    ex.nrf.mode = FeatureMode::NRF;
    ex.nrf.values.assign(adv.begin(), adv.end());
    ex.nrf.label = BinaryLabel::Attack;
    ex.nrf.origin = i;
    ex.nrf.origin_label = ex.record.label.to_string();
    ex.substitute_score = score;
    ex.parent = i;
    ex.query_count = zr.query_count;
    out.kept.push_back(std::move(ex));
  }
  return out;
}

Dataset examples_dataset(std::span<const AdversarialExample> examples) {
  Dataset d;
  d.provenance = Provenance::Synthetic;
  d.records.reserve(examples.size());
  for (const auto& e : examples) d.records.push_back(e.record);
  return d;
}

std::vector<ScoreCurve> score_distribution(std::span<const ModelUnderTest> models,
                                           std::span<const AdversarialExample> examples,
                                           const EncodingContext& ctx) {
  if (examples.empty()) throw DataError("score distribution: no examples");
  std::vector<ScoreCurve> curves;
  for (const auto& m : models) {
    if (m.model == nullptr) throw UsageError("score distribution: missing model");
    if (m.norm != nullptr && m.model->mode() != FeatureMode::NRF) {
      throw UsageError("score distribution: normalization only applies to NRF models");
    }
    ScoreCurve c;
    c.name = m.name;
    std::size_t detected = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      FeatureVector row = encode(examples[i].record, m.model->mode(), ctx, i);
      if (m.norm != nullptr) row = m.norm->forward(row);
      const double s = m.model->predict_proba(row);
      detected += s >= 0.5;
      c.scores.push_back(s);
    }
    std::sort(c.scores.begin(), c.scores.end());
    c.detected_fraction = static_cast<double>(detected) / static_cast<double>(examples.size());
    curves.push_back(std::move(c));
  }
  return curves;
}

void write_score_curves_csv(std::span<const ScoreCurve> curves, std::ostream& out) {
  out << "model,rank,score\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.scores.size(); ++i) {
      out << c.name << ',' << i << ',' << text::format_double(c.scores[i]) << '\n';
    }
  }
}

}  // namespace hgnids
