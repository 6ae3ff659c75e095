#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "core/binio.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/rng.hpp"

namespace bvoc {

namespace {

struct Prepared {
    Mat net_in;  // what the network consumes
    Mat target;  // T(hr)
    double lr_max = 0;
    const PatchPair* src = nullptr;
};

Prepared prepare_pair(const ModelConfig& mc, const Preproc& p, const PatchPair& pair)
{
    if (pair.alpha != mc.alpha)
        throw ConfigError("pair " + pair.id + " has alpha " +
                          std::to_string(pair.alpha) + " but the model expects " +
                          std::to_string(mc.alpha));
    Prepared out;
    out.net_in = network_input(mc, preproc_forward(p, pair.lr.values()));
    out.target = preproc_forward(p, pair.hr.values());
    out.lr_max = pair.lr.max_value();
    out.src = &pair;
    return out;
}

void fill_batch(Tensor4& t, const std::vector<Prepared>& pool,
                const std::vector<size_t>& idx, bool targets)
{
    for (size_t b = 0; b < idx.size(); ++b) {
        const Mat& m = targets ? pool[idx[b]].target : pool[idx[b]].net_in;
        std::copy(m.v.begin(), m.v.end(), t.v.begin() + b * m.v.size());
    }
}

struct ValScore {
    double ssim_mean = std::numeric_limits<double>::quiet_NaN();
    double nmse_mean = std::numeric_limits<double>::quiet_NaN();
};

ValScore validate(const Model& model, const Preproc& p,
                  const std::vector<Prepared>& val, uint32_t batch_size)
{
    ValScore s;
    if (val.empty())
        return s;
    double ssim_sum = 0, nmse_sum = 0;
    const size_t h = val.front().net_in.rows, w = val.front().net_in.cols;
    for (size_t off = 0; off < val.size(); off += batch_size) {
        const size_t n = std::min<size_t>(batch_size, val.size() - off);
        Tensor4 in(n, 1, h, w);
        for (size_t b = 0; b < n; ++b)
            std::copy(val[off + b].net_in.v.begin(), val[off + b].net_in.v.end(),
                      in.v.begin() + b * h * w);
        Tensor4 out = model.forward(in);
        for (size_t b = 0; b < n; ++b) {
            Mat net01 = mat_from_tensor(out, b);
            for (double& v : net01.v)
                v = std::clamp(v, 0.0, 1.0);
            const Prepared& pp = val[off + b];
            ssim_sum += ssim(net01, pp.target);
            Mat phys = impose_envelope(preproc_invert(p, net01, pp.lr_max));
            nmse_sum += nmse_db(pp.src->hr.values(), phys);
        }
    }
    s.ssim_mean = ssim_sum / static_cast<double>(val.size());
    s.nmse_mean = nmse_sum / static_cast<double>(val.size());
    return s;
}

std::string log_line(uint64_t iter, double lr, double loss, const ValScore& v)
{
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu, %.12g, %.12g, %.12g, %.12g",
                  static_cast<unsigned long long>(iter), lr, loss, v.ssim_mean,
                  v.nmse_mean);
    return buf;
}

} // namespace

TrainResult train_model(Model model, const DatasetSplit& split, const Preproc& preproc,
                        const TrainConfig& cfg)
{
    validate_schedule(cfg.schedule);
    if (cfg.batch_size < 1)
        throw ConfigError("batch_size must be at least 1");
    if (cfg.validation_interval < 1)
        throw ConfigError("validation_interval must be at least 1");
    if (preproc.kind == TransformKind::quantile && !preproc.quantile.fitted())
        throw StateError("quantile transform not fitted");

    const uint64_t total = cfg.schedule.total_iterations;
    TrainResult res{std::move(model)};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    res.best_val_ssim = nan;
    res.first_train_loss = nan;
    res.final_train_loss = nan;
    if (total == 0)
        return res;

    if (split.train.empty())
        throw InsufficientDataError("no training pairs");

    const ModelConfig& mc = res.model.config();
    std::vector<Prepared> train_pool;
    train_pool.reserve(split.train.size());
    for (const PatchPair& pair : split.train)
        train_pool.push_back(prepare_pair(mc, preproc, pair));
    for (const Prepared& pp : train_pool)
        if (!pp.net_in.same_shape(train_pool.front().net_in) ||
            !pp.target.same_shape(train_pool.front().target))
            throw ConfigError("training pairs must share dimensions");

    std::vector<Prepared> val_pool;
    const size_t n_val = std::min(cfg.validation_max_pairs, split.validation.size());
    val_pool.reserve(n_val);
    for (size_t i = 0; i < n_val; ++i)
        val_pool.push_back(prepare_pair(mc, preproc, split.validation[i]));
    for (const Prepared& pp : val_pool)
        if (!pp.net_in.same_shape(val_pool.front().net_in))
            throw ConfigError("validation pairs must share dimensions");

    const size_t ih = train_pool.front().net_in.rows;
    const size_t iw = train_pool.front().net_in.cols;
    const size_t th = train_pool.front().target.rows;
    const size_t tw = train_pool.front().target.cols;

    Rng rng(cfg.seed);
    OptimState opt = make_optim_state(res.model.params());
    Tensor4 in(cfg.batch_size, 1, ih, iw), target(cfg.batch_size, 1, th, tw);
    std::vector<size_t> idx(cfg.batch_size);

    std::vector<Param> best_params;
    bool have_best = false;

    for (uint64_t t = 0; t < total; ++t) {
        for (size_t b = 0; b < idx.size(); ++b)
            idx[b] = rng.below(train_pool.size());
        fill_batch(in, train_pool, idx, false);
        fill_batch(target, train_pool, idx, true);

        ForwardCache cache;
        Tensor4 pred = res.model.forward(in, cache);
        const double loss = mse_loss(pred, target);
        if (!std::isfinite(loss))
            throw NumericsError("non-finite loss at iteration " + std::to_string(t + 1));
        res.model.zero_grad();
        res.model.backward(cache, mse_loss_backward(pred, target));
        const double lr = cosine_lr(cfg.schedule, t);
        adam_step(res.model.params(), opt, lr);

        if (t == 0)
            res.first_train_loss = loss;
        res.final_train_loss = loss;

        const uint64_t iter = t + 1;
        if (iter % cfg.validation_interval == 0 || iter == total) {
            const ValScore v = validate(res.model, preproc, val_pool, cfg.batch_size);
            res.log_lines.push_back(log_line(iter, lr, loss, v));
            if (!val_pool.empty() &&
                (!have_best || v.ssim_mean > res.best_val_ssim)) {
                best_params = res.model.params();
                res.best_val_ssim = v.ssim_mean;
                res.best_iteration = iter;
                have_best = true;
            }
        }
    }

    if (have_best)
        res.model.params() = std::move(best_params);

    if (!cfg.checkpoint_path.empty())
        write_model(res.model, cfg.checkpoint_path);
    if (!cfg.log_path.empty()) {
        std::string out = "iter, lr, train_loss, val_ssim, val_nmse_db\n";
        for (const std::string& line : res.log_lines)
            out += line + '\n';
        binio::write_file(cfg.log_path, out);
    }
    return res;
}

} // namespace bvoc
