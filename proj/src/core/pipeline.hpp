#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/grid.hpp"
#include "core/model.hpp"
#include "core/transforms.hpp"

namespace bvoc {

enum class TransformKind : uint8_t { scaling = 0, quantile = 1 };

TransformKind transform_kind_from_name(const std::string& name);
std::string transform_kind_name(TransformKind k);

/// The preprocessing strategy used around the network. For quantile the
/// fitted map is carried along; scaling is stateless per grid.
struct Preproc {
    TransformKind kind = TransformKind::quantile;
    QuantileTransform quantile;
};

/// [0,1] representation used for the loss and for SSIM. Scaling divides a
/// grid by its own maximum (an all-zero grid passes through as zeros);
/// quantile applies the fitted CDF map. Unfitted quantile is a StateError.
Mat preproc_forward(const Preproc& p, const Mat& values);

/// Physical-domain inverse of a clamped [0,1] prediction. For scaling only
/// the LR input's maximum is known at deployment (lr_max), mirroring the
/// source method's deployment asymmetry; lr_max 0 maps everything to 0.
Mat preproc_invert(const Preproc& p, const Mat& clamped01, double lr_max);

/// What the network consumes for a transformed LR mat: srcnn gets the
/// bicubic pre-upsample at target scale, resnet gets the LR mat as-is.
Mat network_input(const ModelConfig& cfg, const Mat& lr_t);

/// Flushes positives below the representable floor to zero and caps values
/// at the envelope ceiling, yielding values a valid grid can hold.
Mat impose_envelope(Mat m);

struct SuperResolved {
    EmissionGrid grid; // physical, envelope-clean
    Mat net01;         // clamp01(N(T(lr))): the transformed-domain image
};

/// Deployment composition: clamp_nonneg(Tinv(clamp01(N(T(lr))))), output
/// alpha x input dims with the envelope re-imposed.
SuperResolved super_resolve_full(const Model& m, const Preproc& p,
                                 const EmissionGrid& lr);
EmissionGrid super_resolve(const Model& m, const Preproc& p, const EmissionGrid& lr);

/// Non-learned reference: clamp_non_negative(bicubic upsample by alpha).
EmissionGrid bicubic_baseline(const EmissionGrid& lr, uint32_t alpha);

struct PairEval {
    std::string pair_id;
    double ssim = 0, nmse_db = 0, dist = 0;
    double ssim_baseline = 0, nmse_db_baseline = 0, dist_baseline = 0;
};

/// Per-pair metrics plus their arithmetic means. SSIM is computed in the
/// transformed domain against T(hr); NMSE and the distribution distance in
/// the physical domain.
struct EvalReport {
    std::string protocol;
    std::string model_id;
    std::vector<PairEval> pairs;
    double mean_ssim = 0, mean_nmse_db = 0, mean_dist = 0;
    double mean_ssim_baseline = 0, mean_nmse_db_baseline = 0, mean_dist_baseline = 0;
};

EvalReport evaluate_pairs(const Model& m, const Preproc& p,
                          const std::vector<PatchPair>& pairs,
                          const std::string& protocol_label,
                          const std::string& model_id);

/// One report per model, all on the same split's test set.
std::vector<EvalReport> run_protocol(const std::vector<const Model*>& models,
                                     const std::vector<const Preproc*>& preprocs,
                                     const std::vector<std::string>& model_ids,
                                     const DatasetSplit& split);

/// One report per corpus; corpora differ in native cell size, alpha fixed.
std::vector<EvalReport> run_scale_invariance(
    const Model& m, const Preproc& p,
    const std::vector<std::pair<std::string, const DatasetSplit*>>& corpora,
    const std::string& model_id);

/// One report per compound corpus, the training-time preproc held fixed.
std::vector<EvalReport> run_cross_compound(
    const Model& m, const Preproc& p,
    const std::vector<std::pair<std::string, const DatasetSplit*>>& corpora,
    const std::string& model_id);

/// Aggregate table, one row per report; and the per-pair detail file.
/// Both are byte-deterministic for identical inputs.
void write_report_table(const std::vector<EvalReport>& reports, const std::string& path);
void write_report_pairs(const EvalReport& report, const std::string& path);

} // namespace bvoc
