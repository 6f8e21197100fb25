#include "evrk/pce/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "evrk/core/csv.hpp"
#include "evrk/core/parallel.hpp"

namespace evrk::pce {

namespace {

constexpr std::uint64_t kShuffleStream = 0x21;
constexpr std::uint64_t kDropoutStream = 0x22;

}  // namespace

LossHistory train(CnnModel& model, const std::vector<NormalizedSample>& train_set,
                  const std::vector<NormalizedSample>& valid_set, const TrainOptions& options) {
    if (train_set.empty() || valid_set.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    if (options.epochs < 1 || options.batch_size < 1) {
        throw std::invalid_argument("train: epochs and batch_size must be >= 1");
    }
    const ParamLayout layout = model.layout();
    for (const auto& s : train_set) {
        if (s.target.size() != model.arch.outputs) {
            throw std::invalid_argument("train: unlabeled training sample");
        }
    }

    const std::size_t n = train_set.size();
    const std::size_t batch = static_cast<std::size_t>(options.batch_size);
    AdamState adam(layout.total());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    // One gradient buffer and loss slot per batch lane: workers write only
    // their own lane, the reduction below runs in lane order.
    std::vector<Eigen::VectorXd> lane_grad(batch, Eigen::VectorXd(layout.total()));
    std::vector<double> lane_loss(batch, 0.0);
    Eigen::VectorXd grad(layout.total());

    LossHistory history;
    history.train_mse.reserve(static_cast<std::size_t>(options.epochs));
    history.valid_mse.reserve(static_cast<std::size_t>(options.epochs));

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        auto shuffle_rng =
            core::derived_engine(options.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
        core::shuffle_in_place(order, shuffle_rng);

        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t count = std::min(batch, n - start);
            core::parallel_for(count, [&](std::size_t lane) {
                const std::size_t sample_index = order[start + lane];
                auto rng = core::derived_engine(
                    options.seed, kDropoutStream,
                    static_cast<std::uint64_t>(epoch) * n + sample_index);
                lane_grad[lane].setZero();
                lane_loss[lane] =
                    sample_loss_grad(model, train_set[sample_index], rng, lane_grad[lane]);
            });
            grad.setZero();
            double batch_loss = 0.0;
            for (std::size_t lane = 0; lane < count; ++lane) {
                grad += lane_grad[lane];
                batch_loss += lane_loss[lane];
            }
            grad /= static_cast<double>(count);
            batch_loss /= static_cast<double>(count);
            epoch_loss_sum += batch_loss * static_cast<double>(count);
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "train: loss diverged (non-finite) at epoch " << epoch + 1 << ", batch "
                    << start / batch + 1;
                throw std::runtime_error(msg.str());
            }
            adam_step(model.params, grad, adam);
        }
        const double train_mse = epoch_loss_sum / static_cast<double>(n);
        const double valid_mse = mean_loss(model, valid_set);
        if (!std::isfinite(valid_mse)) {
            std::ostringstream msg;
            msg << "train: validation loss diverged (non-finite) at epoch " << epoch + 1;
            throw std::runtime_error(msg.str());
        }
        history.train_mse.push_back(train_mse);
        history.valid_mse.push_back(valid_mse);
    }
    return history;
}

void write_loss_history_csv(const std::string& path, const LossHistory& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("write_loss_history_csv: cannot open '" + path + "'");
    }
    out << "epoch,train_mse,valid_mse\n";
    for (std::size_t e = 0; e < history.train_mse.size(); ++e) {
        out << e + 1 << ',' << core::format_double(history.train_mse[e]) << ','
            << core::format_double(history.valid_mse[e]) << '\n';
    }
}

LossHistory read_loss_history_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("read_loss_history_csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != "epoch,train_mse,valid_mse") {
        throw std::invalid_argument("read_loss_history_csv: bad header");
    }
    LossHistory history;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = core::split_csv_line(line);
        if (cells.size() != 3) {
            throw std::invalid_argument("read_loss_history_csv: bad row");
        }
        history.train_mse.push_back(core::parse_double(cells[1]));
        history.valid_mse.push_back(core::parse_double(cells[2]));
    }
    return history;
}

double mean_loss(const CnnModel& model, const std::vector<NormalizedSample>& set) {
    if (set.empty()) {
        throw std::invalid_argument("mean_loss: empty set");
    }
    std::vector<double> losses(set.size());
    core::parallel_for(set.size(), [&](std::size_t i) {
        losses[i] = sample_loss(model, set[i]);
    });
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(set.size());
}

}  // namespace evrk::pce
