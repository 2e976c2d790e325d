#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hgnids/features.hpp"
#include "hgnids/tree.hpp"

namespace hgnids {

/// Per-feature min-max scaling of the nine raw features.
struct NormalizationParams {
  std::array<double, kNrfWidth> min{};
  std::array<double, kNrfWidth> max{};

  static NormalizationParams fit(std::span<const FeatureVector> nrf_rows);

  /// Constant features map to 0 and back to their single value.
  std::array<double, kNrfWidth> forward(std::span<const double> x) const;
  std::array<double, kNrfWidth> inverse(std::span<const double> z) const;
  FeatureVector forward(const FeatureVector& row) const;

  void save(std::ostream& out) const;
  static NormalizationParams load(std::istream& in);
  bool operator==(const NormalizationParams&) const = default;
};

/// Gradient-boosted model over normalized raw features, as an attacker
/// without hypergraph knowledge would build.
struct Substitute {
  TreeModel model;
  NormalizationParams norm;

  double score(std::span<const double> raw_nrf) const;
};

/// rows: NRF vectors in original units, both labels present.
Substitute fit_substitute(std::span<const FeatureVector> rows, std::uint64_t seed,
                          const TreeParams& params = TreeParams::gradient_boosted());

struct ZooBudget {
  std::size_t max_iters = 200;
  double step = 0.02;
  double h = 1e-3;
  std::size_t per_coord_batch = 1;
};

using Scorer = std::function<double(std::span<const double>)>;

/// Symmetric-difference estimate of df/dx_i, with probes clipped to [0,1].
/// Costs two scorer calls.
double estimate_partial(const Scorer& f, std::span<const double> x, std::size_t i, double h);

struct ZooResult {
  std::vector<double> x;
  std::size_t query_count = 0;  // exactly 2 per coordinate probe
  std::size_t iterations = 0;
  double initial_score = 0.0;
  double final_score = 0.0;
  /// Budget used up and the score never moved.
  bool stalled = false;
};

/// Coordinate descent on f using zeroth-order estimates, importance
/// sampling coordinates by their most recent |gradient|. Coordinates listed
/// in `frozen` are never touched. Stops after max_iters iterations or once
/// f < 0.5. A coordinate with a zero estimate stays put.
ZooResult zoo_attack(const Scorer& f, std::span<const double> x, const ZooBudget& budget,
                     std::uint64_t seed, std::span<const std::size_t> frozen = {});

/// Attacks a normalized NRF row against a model; the protocol slot is frozen.
ZooResult zoo_attack(const TreeModel& model, std::span<const double> x_norm, const ZooBudget& budget,
                     std::uint64_t seed);

enum class AdvIpMode { Fresh, Parent };

std::string_view to_string(AdvIpMode mode);
AdvIpMode parse_adv_ip_mode(std::string_view text);

/// The unseen pair carried by adversarial examples in Fresh mode.
inline const IpPair kAdversarialPair{"198.18.0.1", "198.19.0.1"};

struct AdversarialExample {
  FlowRecord record;     // perturbed flow, labeled PortScan
  FeatureVector nrf;     // same values as NRF, label ATTACK
  double substitute_score = 0.0;
  std::size_t parent = 0;
  std::size_t query_count = 0;
};

struct GenerationOptions {
  double keep_threshold = 0.55;
  ZooBudget budget;
  AdvIpMode ip_mode = AdvIpMode::Fresh;
};

struct GenerationResult {
  std::vector<AdversarialExample> kept;
  std::size_t generated = 0;

  double kept_fraction() const {
    return generated == 0 ? 0.0 : static_cast<double>(kept.size()) / static_cast<double>(generated);
  }
};

/// Attacks every attack-labeled parent, rescales back to original units,
/// re-scores with the substitute and keeps examples scoring at least
/// keep_threshold.
GenerationResult generate_examples(std::span<const FlowRecord> parents, const Substitute& substitute,
                                   const GenerationOptions& options, std::uint64_t seed);

Dataset examples_dataset(std::span<const AdversarialExample> examples);

struct ModelUnderTest {
  std::string name;
  const TreeModel* model = nullptr;
  const NormalizationParams* norm = nullptr;  // NRF models trained on scaled inputs
};

struct ScoreCurve {
  std::string name;
  std::vector<double> scores;  // ascending
  double detected_fraction = 0.0;  // share of scores >= 0.5
};

/// Scores each example with each model, encoding through ctx for HGI/HGA.
std::vector<ScoreCurve> score_distribution(std::span<const ModelUnderTest> models,
                                           std::span<const AdversarialExample> examples,
                                           const EncodingContext& ctx);

/// "model,rank,score"
void write_score_curves_csv(std::span<const ScoreCurve> curves, std::ostream& out);

}  // namespace hgnids
