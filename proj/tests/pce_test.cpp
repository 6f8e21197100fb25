#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "evrk/pce/layers.hpp"
#include "evrk/pce/model.hpp"
#include "evrk/pce/model_io.hpp"
#include "evrk/pce/train.hpp"
#include "evrk/prep/prep.hpp"
#include "evrk/simgen/drive_cycles.hpp"
#include "evrk/simgen/generator.hpp"
#include "evrk/simgen/profiles.hpp"

using namespace evrk;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

prep::NormalizationParams test_norm() {
    prep::NormalizationParams norm;
    norm.set(prep::Channel::VehSp, 0.0, 25.0);
    norm.set(prep::Channel::RoadEl, 50.0, 150.0);
    norm.set(prep::Channel::VehAcc, -3.0, 3.0);
    norm.set(prep::Channel::AuxLd, 0.0, 1200.0);
    norm.set(prep::Channel::WindSp, 0.0, 14.0);
    norm.set(prep::Channel::EnvTemp, -5.0, 35.0);
    norm.set(prep::Channel::BattSoc, 0.0, 100.0);
    norm.set(prep::Channel::ActPow, -2e4, 5e4);
    return norm;
}

pce::NormalizedSample random_sample(const pce::ArchDescriptor& arch, core::Engine& rng,
                                    bool labeled = true) {
    pce::NormalizedSample s;
    s.channels.resize(arch.blocks, arch.input_len);
    for (Eigen::Index r = 0; r < s.channels.rows(); ++r) {
        for (Eigen::Index c = 0; c < s.channels.cols(); ++c) {
            s.channels(r, c) = core::uniform01(rng);
        }
    }
    s.scalar_temp = core::uniform01(rng);
    s.scalar_soc = core::uniform01(rng);
    if (labeled) {
        s.target.resize(arch.outputs);
        for (Eigen::Index i = 0; i < s.target.size(); ++i) s.target[i] = core::uniform01(rng);
    }
    return s;
}

}  // namespace

TEST_CASE("conv1d identity kernel reproduces the input") {
    MatrixXd x(1, 6);
    x << 1, -2, 3, 0, 5, 4;
    MatrixXd w(1, 3);
    w << 0, 1, 0;
    VectorXd b = VectorXd::Zero(1);
    CHECK(pce::conv1d(x, w, b) == x);
}

TEST_CASE("conv1d all-zero kernels give the bias") {
    MatrixXd x = MatrixXd::Random(2, 5);
    MatrixXd w = MatrixXd::Zero(3, 2 * 3);
    VectorXd b(3);
    b << 1.5, -2.0, 0.25;
    const MatrixXd y = pce::conv1d(x, w, b);
    for (Eigen::Index c = 0; c < 5; ++c) {
        CHECK(y(0, c) == 1.5);
        CHECK(y(1, c) == -2.0);
        CHECK(y(2, c) == 0.25);
    }
}

TEST_CASE("conv1d box kernel with zero padding: [1,2,3] -> [3,6,5]") {
    MatrixXd x(1, 3);
    x << 1, 2, 3;
    MatrixXd w(1, 3);
    w << 1, 1, 1;
    VectorXd b = VectorXd::Zero(1);
    const MatrixXd y = pce::conv1d(x, w, b);
    CHECK(y(0, 0) == 3.0);
    CHECK(y(0, 1) == 6.0);
    CHECK(y(0, 2) == 5.0);
}

TEST_CASE("avg_pool halves length with pair means and drops odd tails") {
    MatrixXd x(1, 4);
    x << 4, 2, 6, 0;
    const MatrixXd y = pce::avg_pool(x);
    CHECK(y.cols() == 2);
    CHECK(y(0, 0) == 3.0);
    CHECK(y(0, 1) == 3.0);

    MatrixXd odd = MatrixXd::Ones(1, 25);
    CHECK(pce::avg_pool(odd).cols() == 12);
    CHECK_THROWS_AS(pce::avg_pool(MatrixXd::Ones(1, 1)), std::invalid_argument);
}

TEST_CASE("three pools map 100 to 12 and constants stay constant") {
    MatrixXd x = MatrixXd::Constant(1, 100, 7.5);
    const MatrixXd y = pce::avg_pool(pce::avg_pool(pce::avg_pool(x)));
    CHECK(y.cols() == 12);
    CHECK((y.array() == 7.5).all());
}

TEST_CASE("relu clamps negatives") {
    MatrixXd x(1, 3);
    x << -1, 0, 2;
    const MatrixXd y = pce::relu(x);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 0.0);
    CHECK(y(0, 2) == 2.0);
    CHECK(pce::relu(-MatrixXd::Ones(2, 2)).isZero(0.0));
    MatrixXd pos = MatrixXd::Constant(2, 2, 3.0);
    CHECK(pce::relu(pos) == pos);
}

TEST_CASE("dropout mask: p=0 identity, survivor fraction concentrates at 1-p") {
    core::Engine rng(77);
    const auto ones = pce::dropout_mask(10, 10, 0.0, rng);
    CHECK((ones.array() == 1.0).all());

    const Eigen::Index n = 1000;
    const auto mask = pce::dropout_mask(n, n, 0.2, rng);
    const double survivors = (mask.array() > 0.0).count() / double(n * n);
    CHECK(survivors == doctest::Approx(0.8).epsilon(0.0125));
    for (Eigen::Index c = 0; c < 5; ++c) {
        for (Eigen::Index r = 0; r < 5; ++r) {
            const double v = mask(r, c);
            CHECK((v == 0.0 || v == doctest::Approx(1.25).epsilon(1e-15)));
        }
    }
    CHECK_THROWS_AS(pce::dropout_mask(2, 2, 1.0, rng), std::invalid_argument);
}

TEST_CASE("xavier bound for equal fans of 3 is 1") {
    core::Engine rng(1);
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < 200000; ++i) {
        const double v = pce::xavier_init(3, 3, rng);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= -1.0);
    CHECK(hi <= 1.0);
    CHECK(lo < -0.99);
    CHECK(hi > 0.99);
}

TEST_CASE("shape ledger matches the published block arithmetic exactly") {
    pce::ArchDescriptor arch;
    const auto s = pce::shape_ledger(arch);
    CHECK(s.branch_lengths[0] == 100);
    CHECK(s.branch_lengths[1] == 50);
    CHECK(s.branch_lengths[2] == 25);
    CHECK(s.branch_lengths[3] == 12);
    CHECK(s.block_channels == 13);
    CHECK(s.block_out_len == 12);
    CHECK(s.flatten_len == 780);
    CHECK(s.fc_in == 782);
    CHECK(s.outputs == 10);

    pce::ArchDescriptor modi;
    modi.blocks = 3;
    modi.append_scalars = false;
    const auto m = pce::shape_ledger(modi);
    CHECK(m.flatten_len == 468);
    CHECK(m.fc_in == 468);
}

TEST_CASE("zero-parameter model maps any sample to the zero vector") {
    pce::ArchDescriptor arch;
    arch.hidden = 16;
    pce::CnnModel model;
    model.arch = arch;
    model.params = VectorXd::Zero(model.layout().total());
    core::Engine rng(3);
    const auto sample = random_sample(arch, rng, false);
    const VectorXd y = pce::forward(model, sample);
    CHECK(y.size() == 10);
    CHECK(y.isZero(0.0));
}

TEST_CASE("residual branch equals three pools of the raw channel") {
    // With all conv weights zero and positive biases zeroed, only the
    // residual rows carry signal into the feature vector; verify through a
    // single-block model by planting an identity readout.
    pce::ArchDescriptor arch;
    arch.blocks = 1;
    arch.input_len = 16;
    arch.hidden = 2;
    arch.outputs = 2;
    arch.append_scalars = false;
    arch.dropout_p = 0.0;
    pce::CnnModel model;
    model.arch = arch;
    const auto layout = model.layout();
    model.params = VectorXd::Zero(layout.total());
    // fc1 row 0 reads the first residual feature (offset 12*... ).
    const auto lens = arch.branch_lengths();
    const int residual_offset = 3 * arch.channel_plan[2] * lens[3];
    model.params[layout.fc1_w().offset + residual_offset] = 1.0;  // row 0, col residual[0]
    model.params[layout.fc2_w().offset + 0] = 1.0;                // out0 reads hidden0

    core::Engine rng(5);
    auto sample = random_sample(arch, rng, false);
    sample.channels = sample.channels.array() + 0.5;  // keep positives for relu transparency
    const VectorXd y = pce::forward(model, sample);
    const MatrixXd pooled =
        pce::avg_pool(pce::avg_pool(pce::avg_pool(sample.channels.row(0))));
    CHECK(y[0] == doctest::Approx(pooled(0, 0)).epsilon(1e-15));
    CHECK(y[1] == 0.0);
}

TEST_CASE("forward in inference mode is deterministic; dropout varies in training") {
    pce::ArchDescriptor arch;
    arch.hidden = 8;
    const auto model = pce::init_model(arch, test_norm(), 9);
    core::Engine rng(3);
    const auto sample = random_sample(arch, rng, false);
    const VectorXd a = pce::forward(model, sample);
    const VectorXd b = pce::forward(model, sample);
    CHECK(a == b);

    core::Engine r1(10), r2(11);
    const VectorXd t1 = pce::forward(model, sample, true, &r1);
    const VectorXd t2 = pce::forward(model, sample, true, &r2);
    CHECK(t1 != t2);
}

TEST_CASE("init_model is seed-deterministic and respects xavier support per piece") {
    pce::ArchDescriptor arch;
    arch.hidden = 8;
    const auto a = pce::init_model(arch, test_norm(), 42);
    const auto b = pce::init_model(arch, test_norm(), 42);
    CHECK(a.params == b.params);
    const auto c = pce::init_model(arch, test_norm(), 43);
    CHECK(a.params != c.params);

    const auto layout = a.layout();
    for (const auto& piece : layout.pieces()) {
        if (piece.cols == 1) {
            for (std::int64_t i = 0; i < piece.count(); ++i) {
                CHECK(a.params[piece.offset + i] == 0.0);
            }
        } else {
            const double bound = std::sqrt(6.0 / (piece.cols + piece.rows));
            for (std::int64_t i = 0; i < piece.count(); ++i) {
                CHECK(std::abs(a.params[piece.offset + i]) <= bound);
            }
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    pce::ArchDescriptor arch;
    arch.blocks = 1;
    arch.input_len = 20;
    arch.hidden = 6;
    arch.outputs = 4;
    arch.dropout_p = 0.2;
    auto model = pce::init_model(arch, test_norm(), 17);
    core::Engine srng(23);
    const auto sample = random_sample(arch, srng);

    const auto layout = model.layout();
    VectorXd grad = VectorXd::Zero(layout.total());
    core::Engine g1(99);
    pce::sample_loss_grad(model, sample, g1, grad);

    // Same dropout stream for every finite-difference evaluation.
    auto loss_at = [&](const VectorXd& p) {
        pce::CnnModel m = model;
        m.params = p;
        core::Engine rng(99);
        VectorXd scratch = VectorXd::Zero(layout.total());
        return pce::sample_loss_grad(m, sample, rng, scratch);
    };

    const double h = 1e-5;
    int checked = 0, ok = 0;
    core::Engine pick(5);
    for (int trial = 0; trial < 400; ++trial) {
        const auto i = static_cast<Eigen::Index>(
            core::uniform_below(pick, static_cast<std::uint64_t>(layout.total())));
        VectorXd p = model.params;
        p[i] += h;
        const double up = loss_at(p);
        p[i] -= 2 * h;
        const double down = loss_at(p);
        const double fd = (up - down) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
        ++checked;
        if (std::abs(fd - grad[i]) / denom <= 1e-4) ++ok;
    }
    CHECK(ok >= checked * 99 / 100);
}

TEST_CASE("adam: zero gradient leaves params unchanged; first unit step is alpha") {
    VectorXd p = VectorXd::Constant(3, 1.5);
    pce::AdamState st(3);
    pce::adam_step(p, VectorXd::Zero(3), st);
    CHECK(p == VectorXd::Constant(3, 1.5));

    VectorXd q = VectorXd::Zero(1);
    pce::AdamState st2(1);
    pce::adam_step(q, VectorXd::Ones(1), st2);
    CHECK(std::abs(q[0] + 0.001) <= 1e-6 * 0.001 + 1e-12);

    // Constant positive gradient: parameter decreases monotonically.
    VectorXd r = VectorXd::Zero(1);
    pce::AdamState st3(1);
    double prev = 0.0;
    for (int i = 0; i < 50; ++i) {
        pce::adam_step(r, VectorXd::Ones(1), st3);
        CHECK(r[0] < prev);
        prev = r[0];
    }

    VectorXd bad = VectorXd::Constant(1, std::nan(""));
    pce::AdamState st4(1);
    CHECK_THROWS_AS(pce::adam_step(r, bad, st4), std::invalid_argument);
}

TEST_CASE("training is seed-deterministic and validation sees no gradients") {
    pce::ArchDescriptor arch;
    arch.blocks = 2;
    arch.input_len = 20;
    arch.hidden = 6;
    arch.outputs = 4;
    core::Engine rng(31);
    std::vector<pce::NormalizedSample> train_set, valid_set;
    for (int i = 0; i < 12; ++i) train_set.push_back(random_sample(arch, rng));
    for (int i = 0; i < 4; ++i) valid_set.push_back(random_sample(arch, rng));

    pce::TrainOptions opt;
    opt.epochs = 5;
    opt.batch_size = 4;
    opt.seed = 7;

    auto m1 = pce::init_model(arch, test_norm(), 7);
    auto m2 = pce::init_model(arch, test_norm(), 7);
    const auto h1 = pce::train(m1, train_set, valid_set, opt);
    const auto h2 = pce::train(m2, train_set, valid_set, opt);
    CHECK(m1.params == m2.params);
    CHECK(h1.train_mse == h2.train_mse);
    CHECK(h1.valid_mse == h2.valid_mse);
    CHECK(h1.train_mse.size() == 5);
}

TEST_CASE("thread count does not change training results") {
    pce::ArchDescriptor arch;
    arch.blocks = 1;
    arch.input_len = 20;
    arch.hidden = 4;
    arch.outputs = 3;
    core::Engine rng(13);
    std::vector<pce::NormalizedSample> train_set, valid_set;
    for (int i = 0; i < 10; ++i) train_set.push_back(random_sample(arch, rng));
    valid_set.push_back(random_sample(arch, rng));

    pce::TrainOptions opt;
    opt.epochs = 3;
    opt.batch_size = 5;
    opt.seed = 3;

    setenv("EVRK_THREADS", "1", 1);
    auto m1 = pce::init_model(arch, test_norm(), 1);
    pce::train(m1, train_set, valid_set, opt);
    setenv("EVRK_THREADS", "4", 1);
    auto m2 = pce::init_model(arch, test_norm(), 1);
    pce::train(m2, train_set, valid_set, opt);
    unsetenv("EVRK_THREADS");
    CHECK(m1.params == m2.params);
}

TEST_CASE("overfit smoke: 32 windows, 200 epochs, >=90% train-MSE drop") {
    // Synthetic windows from the generator keep this exercise honest.
    simgen::GenerationGrid grid;
    grid.temps_C = {25.0};
    grid.grade_profiles = {simgen::grade_rolling(400)};
    grid.initial_socs = {80.0};
    simgen::DriveCycle cyc;
    cyc.name = "ramp";
    cyc.t_s = Eigen::VectorXd::LinSpaced(5, 0.0, 320.0);
    cyc.v_mps.resize(5);
    cyc.v_mps << 0.0, 14.0, 3.0, 17.0, 0.0;
    grid.drive_cycles.push_back({cyc.name, simgen::sample_cycle(cyc, 10.0)});
    grid.wind_profiles = {simgen::wind_calm(400)};
    grid.aux_profiles = {simgen::aux_low(400)};
    grid.rng_seed = 5;

    core::VehicleParams params;
    const auto ds = simgen::generate(grid, params);
    REQUIRE(ds.windows.size() == 32);

    const auto norm = prep::fit_normalization(ds);
    pce::ArchDescriptor arch;
    arch.hidden = 32;
    std::vector<pce::NormalizedSample> samples;
    for (const auto& w : ds.windows) samples.push_back(pce::make_sample(w, norm, true));

    auto model = pce::init_model(arch, norm, 11);
    pce::TrainOptions opt;
    opt.epochs = 200;
    opt.batch_size = 64;
    opt.seed = 11;
    const auto history = pce::train(model, samples, samples, opt);
    const double first = history.train_mse.front();
    const double last = history.train_mse.back();
    CHECK(last <= 0.10 * first);
}

TEST_CASE("model file round-trips bit-exactly and reproduces predictions") {
    namespace fs = std::filesystem;
    pce::ArchDescriptor arch;
    arch.blocks = 2;
    arch.input_len = 20;
    arch.hidden = 6;
    arch.outputs = 4;
    const auto model = pce::init_model(arch, test_norm(), 3);
    const auto dir = fs::temp_directory_path() / "evrk_pce_io";
    fs::create_directories(dir);
    const auto path = (dir / "m.pce").string();
    pce::save_model(path, model);
    const auto back = pce::load_model(path);
    CHECK(back.arch == model.arch);
    CHECK(back.params == model.params);
    REQUIRE(back.norm.entries().size() == model.norm.entries().size());
    for (std::size_t i = 0; i < model.norm.entries().size(); ++i) {
        CHECK(back.norm.entries()[i].channel == model.norm.entries()[i].channel);
        CHECK(back.norm.entries()[i].min == model.norm.entries()[i].min);
        CHECK(back.norm.entries()[i].max == model.norm.entries()[i].max);
    }
    core::Engine rng(2);
    const auto sample = random_sample(arch, rng, false);
    CHECK(pce::forward(model, sample) == pce::forward(back, sample));
    CHECK_THROWS_AS(pce::load_model((dir / "missing.pce").string()), std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("loss history CSV round-trips") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "evrk_pce_hist";
    fs::create_directories(dir);
    const auto path = (dir / "h.csv").string();
    pce::LossHistory h;
    h.train_mse = {0.5, 0.25, 0.125};
    h.valid_mse = {0.6, 0.3, 0.2};
    pce::write_loss_history_csv(path, h);
    const auto back = pce::read_loss_history_csv(path);
    CHECK(back.train_mse == h.train_mse);
    CHECK(back.valid_mse == h.valid_mse);
    fs::remove_all(dir);
}
