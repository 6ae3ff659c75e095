#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "core/binio.hpp"
#include "core/dataset.hpp"
#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "core/model.hpp"
#include "core/optim.hpp"
#include "core/pipeline.hpp"
#include "core/rng.hpp"
#include "core/train.hpp"

using namespace bvoc;

namespace {

ScheduleConfig reference_schedule()
{
    ScheduleConfig s;
    s.lr_max = 1e-4;
    s.lr_min = 1e-7;
    s.total_iterations = 50000;
    s.restart_iterations = {10000, 20000, 40000};
    return s;
}

PatchPair make_training_pair(uint64_t seed, const std::string& id)
{
    Rng rng(seed);
    Mat hr(16, 16);
    for (double& x : hr.v)
        x = rng.unit() < 0.4 ? 0.0 : rng.log_uniform(1e-14, 1e-10);
    const GridMeta meta{40, 44, 10, 14, {2012, 7}, Compound::isoprene};
    const EmissionGrid hrg = make_grid(hr, meta);
    return PatchPair{id, coarsen(hrg, 2), hrg, 2};
}

DatasetSplit tiny_split(size_t n_train, size_t n_val)
{
    DatasetSplit split;
    for (size_t i = 0; i < n_train; ++i)
        split.train.push_back(make_training_pair(500 + i, "tr" + std::to_string(i)));
    for (size_t i = 0; i < n_val; ++i)
        split.validation.push_back(make_training_pair(900 + i, "va" + std::to_string(i)));
    return split;
}

ModelConfig tiny_resnet()
{
    ModelConfig cfg;
    cfg.arch = Arch::resnet;
    cfg.alpha = 2;
    cfg.base_width = 2;
    cfg.n_blocks = 0;
    cfg.init_seed = 3;
    return cfg;
}

bool same_params(const Model& a, const Model& b)
{
    if (a.params().size() != b.params().size())
        return false;
    for (size_t i = 0; i < a.params().size(); ++i)
        if (!(a.params()[i].value == b.params()[i].value))
            return false;
    return true;
}

} // namespace

TEST_CASE("cosine schedule anchors")
{
    const ScheduleConfig s = reference_schedule();

    CHECK(std::fabs(cosine_lr(s, 0) - 1e-4) < 1e-12);
    for (const uint64_t r : {10000ull, 20000ull, 40000ull})
        CHECK(std::fabs(cosine_lr(s, r) - 1e-4) < 1e-12);

    // closed form hits lr_min exactly at each period's end
    CHECK(cosine_value(1e-7, 1e-4, 10000.0, 10000.0) == 1e-7);
    CHECK(cosine_value(1e-7, 1e-4, 10000.0 - 1e-9, 10000.0) ==
          doctest::Approx(1e-7).epsilon(1e-9));

    // halfway through a period the rate is the arithmetic mean of the ends
    CHECK(std::fabs(cosine_lr(s, 5000) - 0.5 * (1e-4 + 1e-7)) < 1e-12);

    // last iteration of the run sits just above lr_min
    const double last = cosine_lr(s, 49999);
    CHECK(last > 1e-7);
    CHECK(last < 1e-7 + 1e-9);

    CHECK_THROWS_AS(cosine_lr(s, 50000), DomainError);
    CHECK_THROWS_AS(cosine_lr(s, 60000), DomainError);
}

TEST_CASE("restart weights damp later peaks")
{
    ScheduleConfig s;
    s.lr_max = 1e-4;
    s.lr_min = 1e-7;
    s.total_iterations = 100;
    s.restart_iterations = {40, 70};
    s.restart_weights = {0.5, 0.25};
    CHECK(std::fabs(cosine_lr(s, 0) - 1e-4) < 1e-12);
    CHECK(std::fabs(cosine_lr(s, 40) - 0.5e-4) < 1e-12);
    CHECK(std::fabs(cosine_lr(s, 70) - 0.25e-4) < 1e-12);
}

TEST_CASE("reference restart placement scales with the run length")
{
    CHECK(scaled_restarts(50000) == std::vector<uint64_t>{10000, 20000, 40000});
    CHECK(scaled_restarts(10) == std::vector<uint64_t>{2, 4, 8});
    CHECK(scaled_restarts(4) == std::vector<uint64_t>{1, 3}); // 4/5 collapses
    CHECK(scaled_restarts(1).empty());
    CHECK(scaled_restarts(0).empty());
}

TEST_CASE("schedule validation")
{
    ScheduleConfig s = reference_schedule();
    CHECK_NOTHROW(validate_schedule(s));

    s.lr_min = 1e-4;
    CHECK_THROWS_AS(validate_schedule(s), ConfigError);
    s = reference_schedule();
    s.restart_iterations = {20000, 10000};
    CHECK_THROWS_AS(validate_schedule(s), ConfigError);
    s = reference_schedule();
    s.restart_iterations = {50000};
    CHECK_THROWS_AS(validate_schedule(s), ConfigError);
    s = reference_schedule();
    s.restart_weights = {1.0};
    CHECK_THROWS_AS(validate_schedule(s), ConfigError);
    s = reference_schedule();
    s.restart_weights = {1.0, 0.0, 0.5};
    CHECK_THROWS_AS(validate_schedule(s), ConfigError);

    // a zero-length schedule is legal but admits no iterations
    ScheduleConfig zero;
    CHECK_NOTHROW(validate_schedule(zero));
    CHECK_THROWS_AS(cosine_lr(zero, 0), DomainError);
}

TEST_CASE("adam follows the textbook recursion")
{
    ModelConfig cfg = tiny_resnet();
    Model m(cfg);
    // isolate two scalars of one tensor; gradients are injected by hand
    Param& p = m.param("conv_first.weight");
    p.value.v[0] = 0.5;
    p.value.v[1] = -1.0;

    OptimState st = make_optim_state(m.params());
    const double lr = 0.1;
    const std::vector<std::vector<double>> grads = {
        {0.3, -0.2}, {-0.1, 0.4}, {0.25, 0.25}};

    double x0 = 0.5, x1 = -1.0;
    double m0 = 0, m1 = 0, v0 = 0, v1 = 0;
    for (size_t step = 0; step < grads.size(); ++step) {
        m.zero_grad();
        p.grad.v[0] = grads[step][0];
        p.grad.v[1] = grads[step][1];
        adam_step(m.params(), st, lr);

        const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        const double t = static_cast<double>(step + 1);
        m0 = b1 * m0 + (1 - b1) * grads[step][0];
        m1 = b1 * m1 + (1 - b1) * grads[step][1];
        v0 = b2 * v0 + (1 - b2) * grads[step][0] * grads[step][0];
        v1 = b2 * v1 + (1 - b2) * grads[step][1] * grads[step][1];
        x0 -= lr * (m0 / (1 - std::pow(b1, t))) /
              (std::sqrt(v0 / (1 - std::pow(b2, t))) + eps);
        x1 -= lr * (m1 / (1 - std::pow(b1, t))) /
              (std::sqrt(v1 / (1 - std::pow(b2, t))) + eps);

        CHECK(p.value.v[0] == doctest::Approx(x0).epsilon(1e-15));
        CHECK(p.value.v[1] == doctest::Approx(x1).epsilon(1e-15));
    }
    CHECK(st.t == 3);
}

TEST_CASE("adam guards")
{
    ModelConfig cfg = tiny_resnet();
    Model m(cfg);
    OptimState st = make_optim_state(m.params());

    m.zero_grad();
    const std::vector<double> before = m.param("conv_first.weight").value.v;
    adam_step(m.params(), st, 0.1); // all-zero gradients move nothing
    CHECK(m.param("conv_first.weight").value.v == before);

    m.param("conv_first.weight").grad.v[0] = std::nan("");
    CHECK_THROWS_AS(adam_step(m.params(), st, 0.1), NumericsError);

    Model other(cfg);
    OptimState empty;
    CHECK_THROWS_AS(adam_step(other.params(), empty, 0.1), ShapeError);
}

TEST_CASE("zero iterations return the model untouched")
{
    const Model m(tiny_resnet());
    TrainConfig cfg;
    cfg.schedule.total_iterations = 0;
    const DatasetSplit empty_split;
    const Preproc p{TransformKind::scaling, {}};
    const TrainResult res = train_model(m, empty_split, p, cfg);
    CHECK(same_params(res.model, m));
    CHECK(res.best_iteration == 0);
    CHECK(std::isnan(res.best_val_ssim));
    CHECK(std::isnan(res.first_train_loss));
    CHECK(std::isnan(res.final_train_loss));
    CHECK(res.log_lines.empty());
}

TEST_CASE("training is bit-reproducible for a fixed seed")
{
    const DatasetSplit split = tiny_split(3, 1);
    const Preproc p{TransformKind::scaling, {}};
    TrainConfig cfg;
    cfg.schedule.lr_max = 1e-3;
    cfg.schedule.total_iterations = 8;
    cfg.batch_size = 2;
    cfg.seed = 17;
    cfg.validation_interval = 4;

    const TrainResult a = train_model(Model(tiny_resnet()), split, p, cfg);
    const TrainResult b = train_model(Model(tiny_resnet()), split, p, cfg);
    CHECK(same_params(a.model, b.model));
    CHECK(a.log_lines == b.log_lines);
    CHECK(a.first_train_loss == b.first_train_loss);
    CHECK(a.final_train_loss == b.final_train_loss);

    cfg.seed = 18;
    const TrainResult c = train_model(Model(tiny_resnet()), split, p, cfg);
    CHECK(a.first_train_loss != c.first_train_loss);
}

TEST_CASE("the first reported loss is the loss of the first sampled batch")
{
    const DatasetSplit split = tiny_split(3, 0);
    const Preproc p{TransformKind::scaling, {}};
    TrainConfig cfg;
    cfg.schedule.total_iterations = 1;
    cfg.batch_size = 4;
    cfg.seed = 23;

    const TrainResult res = train_model(Model(tiny_resnet()), split, p, cfg);

    // mirror the documented draw order with an untouched model
    Rng rng(cfg.seed);
    std::vector<size_t> idx(cfg.batch_size);
    for (size_t& i : idx)
        i = rng.below(split.train.size());
    const Model fresh(tiny_resnet());
    std::vector<Mat> ins, tgts;
    for (const size_t i : idx) {
        ins.push_back(network_input(fresh.config(),
                                    preproc_forward(p, split.train[i].lr.values())));
        tgts.push_back(preproc_forward(p, split.train[i].hr.values()));
    }
    const double mirror =
        mse_loss(fresh.forward(tensor_from_mats(ins)), tensor_from_mats(tgts));
    CHECK(res.first_train_loss == mirror);
}

TEST_CASE("a short run reduces the training loss")
{
    const DatasetSplit split = tiny_split(4, 0);
    const Preproc p{TransformKind::scaling, {}};
    TrainConfig cfg;
    cfg.schedule.lr_max = 3e-3;
    cfg.schedule.total_iterations = 40;
    cfg.batch_size = 4;
    cfg.seed = 29;

    const TrainResult res = train_model(Model(tiny_resnet()), split, p, cfg);
    CHECK(std::isfinite(res.first_train_loss));
    CHECK(res.final_train_loss < res.first_train_loss);
}

TEST_CASE("log lines appear at the interval and at the end")
{
    const DatasetSplit split = tiny_split(2, 1);
    const Preproc p{TransformKind::scaling, {}};
    TrainConfig cfg;
    cfg.schedule.total_iterations = 12;
    cfg.batch_size = 2;
    cfg.validation_interval = 5;
    namespace fs = std::filesystem;
    cfg.log_path = (fs::temp_directory_path() / "bvocsr_train.log").string();

    const TrainResult res = train_model(Model(tiny_resnet()), split, p, cfg);
    REQUIRE(res.log_lines.size() == 3); // iterations 5, 10 and 12

    const std::vector<uint64_t> want_iters = {5, 10, 12};
    for (size_t i = 0; i < 3; ++i) {
        unsigned long long iter = 0;
        double lr = 0, loss = 0, vssim = 0, vnmse = 0;
        const int n = std::sscanf(res.log_lines[i].c_str(), "%llu, %lg, %lg, %lg, %lg",
                                  &iter, &lr, &loss, &vssim, &vnmse);
        REQUIRE(n == 5);
        CHECK(iter == want_iters[i]);
        CHECK(lr == doctest::Approx(cosine_lr(cfg.schedule, iter - 1)).epsilon(1e-11));
        CHECK(std::isfinite(loss));
        CHECK(vssim <= 1.0);
        CHECK(std::isfinite(vnmse));
    }

    const auto bytes = binio::read_file(cfg.log_path);
    const std::string text(bytes.begin(), bytes.end());
    CHECK(text.starts_with("iter, lr, train_loss, val_ssim, val_nmse_db\n"));
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    fs::remove(cfg.log_path);
}

TEST_CASE("the best validation model is kept and checkpointed")
{
    const DatasetSplit split = tiny_split(3, 2);
    const Preproc p{TransformKind::scaling, {}};
    TrainConfig cfg;
    cfg.schedule.lr_max = 1e-3;
    cfg.schedule.total_iterations = 10;
    cfg.batch_size = 2;
    cfg.validation_interval = 2;
    namespace fs = std::filesystem;
    cfg.checkpoint_path = (fs::temp_directory_path() / "bvocsr_best.emw").string();

    const TrainResult res = train_model(Model(tiny_resnet()), split, p, cfg);
    CHECK(res.best_iteration >= 1);
    CHECK(res.best_iteration <= 10);
    CHECK(std::isfinite(res.best_val_ssim));
    CHECK(res.best_val_ssim <= 1.0);

    const Model from_disk = read_model(cfg.checkpoint_path);
    CHECK(same_params(from_disk, res.model));
    fs::remove(cfg.checkpoint_path);
}

TEST_CASE("without validation pairs the final model is returned")
{
    const DatasetSplit split = tiny_split(2, 0);
    const Preproc p{TransformKind::scaling, {}};
    TrainConfig cfg;
    cfg.schedule.total_iterations = 6;
    cfg.batch_size = 2;
    cfg.validation_interval = 3;

    const TrainResult res = train_model(Model(tiny_resnet()), split, p, cfg);
    CHECK(res.best_iteration == 0);
    CHECK(std::isnan(res.best_val_ssim));
    REQUIRE(res.log_lines.size() == 2);
    CHECK(res.log_lines[0].find("nan") != std::string::npos);
}

TEST_CASE("training rejects bad configurations")
{
    const DatasetSplit split = tiny_split(2, 0);
    const Preproc scaling{TransformKind::scaling, {}};

    TrainConfig cfg;
    cfg.schedule.total_iterations = 2;
    cfg.batch_size = 0;
    CHECK_THROWS_AS(train_model(Model(tiny_resnet()), split, scaling, cfg), ConfigError);

    cfg.batch_size = 2;
    cfg.validation_interval = 0;
    CHECK_THROWS_AS(train_model(Model(tiny_resnet()), split, scaling, cfg), ConfigError);

    cfg.validation_interval = 100;
    CHECK_THROWS_AS(train_model(Model(tiny_resnet()), DatasetSplit{}, scaling, cfg),
                    InsufficientDataError);

    const Preproc unfitted{TransformKind::quantile, {}};
    CHECK_THROWS_AS(train_model(Model(tiny_resnet()), split, unfitted, cfg), StateError);

    // alpha mismatch between the pairs (x2) and the model (x4)
    ModelConfig four = tiny_resnet();
    four.alpha = 4;
    CHECK_THROWS_AS(train_model(Model(four), split, scaling, cfg), ConfigError);

    DatasetSplit uneven = split;
    uneven.train.push_back(make_training_pair(777, "big"));
    uneven.train.back().hr = coarsen(uneven.train.back().hr, 2); // now 8x8
    uneven.train.back().lr = coarsen(uneven.train.back().lr, 2); // now 4x4
    CHECK_THROWS_AS(train_model(Model(tiny_resnet()), uneven, scaling, cfg), ConfigError);
}

TEST_CASE("a divergent forward pass names the failing iteration")
{
    const DatasetSplit split = tiny_split(2, 0);
    const Preproc p{TransformKind::scaling, {}};
    Model m(tiny_resnet());
    Param& w = m.param("conv_first.weight");
    std::fill(w.value.v.begin(), w.value.v.end(), 1e200);
    Param& up = m.param("up0.conv.weight");
    std::fill(up.value.v.begin(), up.value.v.end(), 1e200);

    TrainConfig cfg;
    cfg.schedule.total_iterations = 3;
    cfg.batch_size = 1;
    CHECK_THROWS_WITH_AS(train_model(m, split, p, cfg),
                         "non-finite loss at iteration 1", NumericsError);
}

TEST_CASE("quantile preprocessing trains end to end")
{
    const DatasetSplit split = tiny_split(3, 1);
    std::vector<double> cells;
    for (const PatchPair& pair : split.train)
        cells.insert(cells.end(), pair.hr.values().v.begin(), pair.hr.values().v.end());
    Preproc p;
    p.kind = TransformKind::quantile;
    p.quantile = fit_quantile_transform(cells, 64);

    TrainConfig cfg;
    cfg.schedule.total_iterations = 4;
    cfg.batch_size = 2;
    cfg.validation_interval = 2;
    const TrainResult res = train_model(Model(tiny_resnet()), split, p, cfg);
    CHECK(std::isfinite(res.first_train_loss));
    CHECK(std::isfinite(res.best_val_ssim));
}
