#include "evrk/pce/model.hpp"

#include <cmath>
#include <stdexcept>

#include "evrk/pce/layers.hpp"

namespace evrk::pce {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::Map<const MatrixXd> piece_matrix(const VectorXd& params, const ParamLayout::Piece& p) {
    // Row-major storage inside the flat vector; Eigen maps are column-major,
    // so map the transpose shape and use it transposed at the call sites.
    return {params.data() + p.offset, p.cols, p.rows};
}

Eigen::Map<const VectorXd> piece_vector(const VectorXd& params, const ParamLayout::Piece& p) {
    return {params.data() + p.offset, p.count()};
}

void add_matrix_grad(VectorXd& grad, const ParamLayout::Piece& p, const MatrixXd& g) {
    Eigen::Map<MatrixXd>(grad.data() + p.offset, p.cols, p.rows) += g.transpose();
}

void add_vector_grad(VectorXd& grad, const ParamLayout::Piece& p, const VectorXd& g) {
    Eigen::Map<VectorXd>(grad.data() + p.offset, p.count()) += g;
}

struct BranchCache {
    MatrixXd patches1, pre1, post1;   // conv1 input patches, pre-ReLU, pooled
    MatrixXd patches2, pre2, post2;
    MatrixXd patches3, pre3, mask3, dropped3, post3;
};

struct ForwardCache {
    std::vector<std::array<BranchCache, 3>> branches;  // per block
    VectorXd features;  // fc input
    VectorXd fc1_pre;
    VectorXd hidden;
    VectorXd output;
};

// One full forward pass; cache is optional (backward needs it).
VectorXd run_forward(const CnnModel& model, const NormalizedSample& sample, bool training,
                     core::Engine* rng, ForwardCache* cache) {
    const auto& arch = model.arch;
    const ParamLayout layout = model.layout();
    if (sample.channels.rows() != arch.blocks || sample.channels.cols() != arch.input_len) {
        throw std::invalid_argument("forward: sample channel shape mismatch");
    }
    if (model.params.size() != layout.total()) {
        throw std::invalid_argument("forward: parameter vector size mismatch");
    }
    if (training && rng == nullptr && arch.dropout_p > 0.0) {
        throw std::invalid_argument("forward: training mode needs an rng for dropout");
    }

    const auto lens = arch.branch_lengths();
    if (cache) cache->branches.resize(static_cast<std::size_t>(arch.blocks));
    VectorXd features(arch.fc_in());

    for (int b = 0; b < arch.blocks; ++b) {
        const MatrixXd x0 = sample.channels.row(b);
        MatrixXd block_out(arch.block_channels(), lens[3]);
        for (int j = 0; j < 3; ++j) {
            BranchCache local;
            BranchCache& c = cache ? (*cache).branches[static_cast<std::size_t>(b)]
                                        [static_cast<std::size_t>(j)]
                                   : local;
            const int k = arch.kernel_sizes[static_cast<std::size_t>(j)];

            c.patches1 = im2col(x0, k);
            MatrixXd z = piece_matrix(model.params, layout.conv_w(b, j, 0)).transpose() * c.patches1;
            z.colwise() += piece_vector(model.params, layout.conv_b(b, j, 0));
            c.pre1 = z;
            c.post1 = avg_pool(relu(z));

            c.patches2 = im2col(c.post1, k);
            z = piece_matrix(model.params, layout.conv_w(b, j, 1)).transpose() * c.patches2;
            z.colwise() += piece_vector(model.params, layout.conv_b(b, j, 1));
            c.pre2 = z;
            c.post2 = avg_pool(relu(z));

            c.patches3 = im2col(c.post2, k);
            z = piece_matrix(model.params, layout.conv_w(b, j, 2)).transpose() * c.patches3;
            z.colwise() += piece_vector(model.params, layout.conv_b(b, j, 2));
            c.pre3 = z;
            MatrixXd a3 = relu(z);
            if (training && arch.dropout_p > 0.0) {
                c.mask3 = dropout_mask(a3.rows(), a3.cols(), arch.dropout_p, *rng);
                c.dropped3 = a3.cwiseProduct(c.mask3);
            } else {
                c.mask3 = MatrixXd::Ones(a3.rows(), a3.cols());
                c.dropped3 = std::move(a3);
            }
            c.post3 = avg_pool(c.dropped3);

            block_out.middleRows(j * arch.channel_plan[2], arch.channel_plan[2]) = c.post3;
        }
        // Parameter-free residual branch: three successive average pools.
        block_out.row(arch.block_channels() - 1) = avg_pool(avg_pool(avg_pool(x0)));

        // Channel-major flatten: rows then columns.
        for (Eigen::Index r = 0; r < block_out.rows(); ++r) {
            features.segment(b * arch.block_features() + r * lens[3], lens[3]) = block_out.row(r);
        }
    }
    if (arch.append_scalars) {
        features[arch.fc_in() - 2] = sample.scalar_temp;
        features[arch.fc_in() - 1] = sample.scalar_soc;
    }

    VectorXd fc1_pre =
        piece_matrix(model.params, layout.fc1_w()).transpose() * features +
        piece_vector(model.params, layout.fc1_b());
    VectorXd hidden = fc1_pre.cwiseMax(0.0);
    VectorXd output = piece_matrix(model.params, layout.fc2_w()).transpose() * hidden +
                      piece_vector(model.params, layout.fc2_b());
    if (cache) {
        cache->features = std::move(features);
        cache->fc1_pre = std::move(fc1_pre);
        cache->hidden = std::move(hidden);
        cache->output = output;
    }
    return output;
}

}  // namespace

double xavier_init(int fan_in, int fan_out, core::Engine& rng) {
    if (fan_in < 1 || fan_out < 1) {
        throw std::invalid_argument("xavier_init: fans must be >= 1");
    }
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    return core::uniform_range(rng, -bound, bound);
}

CnnModel init_model(const ArchDescriptor& arch, const prep::NormalizationParams& norm,
                    std::uint64_t seed) {
    arch.validate();
    CnnModel model;
    model.arch = arch;
    model.norm = norm;
    const ParamLayout layout = ParamLayout::from(arch);
    model.params = VectorXd::Zero(layout.total());
    core::Engine rng = core::derived_engine(seed, 0x11, 0);
    for (const auto& piece : layout.pieces()) {
        if (piece.cols == 1) continue;  // biases stay zero
        for (std::int64_t i = 0; i < piece.count(); ++i) {
            model.params[piece.offset + i] = xavier_init(piece.cols, piece.rows, rng);
        }
    }
    return model;
}

NormalizedSample make_sample(const core::PartitionedWindow& w,
                             const prep::NormalizationParams& norm, bool with_target) {
    const auto check = core::validate_window(w);
    if (!check) {
        throw std::invalid_argument("make_sample: invalid window: " + check.violation);
    }
    NormalizedSample s;
    s.channels.resize(5, w.veh_sp.size());
    s.channels.row(0) = prep::normalize(w.veh_sp, norm.at(prep::Channel::VehSp)).values;
    s.channels.row(1) = prep::normalize(w.road_el, norm.at(prep::Channel::RoadEl)).values;
    s.channels.row(2) = prep::normalize(w.veh_acc, norm.at(prep::Channel::VehAcc)).values;
    s.channels.row(3) = prep::normalize(w.aux_ld, norm.at(prep::Channel::AuxLd)).values;
    s.channels.row(4) = prep::normalize(w.wind_sp, norm.at(prep::Channel::WindSp)).values;
    s.scalar_temp = prep::normalize_scalar(w.env_temp, norm.at(prep::Channel::EnvTemp));
    s.scalar_soc = prep::normalize_scalar(w.batt_soc, norm.at(prep::Channel::BattSoc));
    if (with_target) {
        if (!w.act_pow) {
            throw std::invalid_argument("make_sample: window has no target");
        }
        s.target = prep::normalize(*w.act_pow, norm.at(prep::Channel::ActPow)).values;
    }
    return s;
}

Eigen::VectorXd forward(const CnnModel& model, const NormalizedSample& sample, bool training,
                        core::Engine* rng) {
    return run_forward(model, sample, training, rng, nullptr);
}

double sample_loss_grad(const CnnModel& model, const NormalizedSample& sample, core::Engine& rng,
                        Eigen::VectorXd& grad) {
    const auto& arch = model.arch;
    const ParamLayout layout = model.layout();
    if (sample.target.size() != arch.outputs) {
        throw std::invalid_argument("sample_loss_grad: target size mismatch");
    }
    if (grad.size() != layout.total()) {
        throw std::invalid_argument("sample_loss_grad: gradient buffer size mismatch");
    }

    ForwardCache cache;
    const VectorXd out = run_forward(model, sample, true, &rng, &cache);
    const VectorXd err = out - sample.target;
    const double loss = err.squaredNorm() / arch.outputs;

    // d loss / d out
    VectorXd d_out = 2.0 * err / arch.outputs;

    // FC2
    add_matrix_grad(grad, layout.fc2_w(), d_out * cache.hidden.transpose());
    add_vector_grad(grad, layout.fc2_b(), d_out);
    VectorXd d_hidden = piece_matrix(model.params, layout.fc2_w()) * d_out;

    // FC1 (ReLU between)
    d_hidden = (cache.fc1_pre.array() > 0.0).select(d_hidden, 0.0);
    add_matrix_grad(grad, layout.fc1_w(), d_hidden * cache.features.transpose());
    add_vector_grad(grad, layout.fc1_b(), d_hidden);
    VectorXd d_features = piece_matrix(model.params, layout.fc1_w()) * d_hidden;

    const auto lens = arch.branch_lengths();
    for (int b = 0; b < arch.blocks; ++b) {
        for (int j = 0; j < 3; ++j) {
            auto& c = cache.branches[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
            MatrixXd d_post3(arch.channel_plan[2], lens[3]);
            for (int r = 0; r < arch.channel_plan[2]; ++r) {
                d_post3.row(r) = d_features.segment(
                    b * arch.block_features() + (j * arch.channel_plan[2] + r) * lens[3], lens[3]);
            }
            // Residual-row gradient reaches only the input; inputs carry no
            // parameters, so it is dropped.

            MatrixXd d = avg_pool_backward(d_post3, lens[2]);
            d = d.cwiseProduct(c.mask3);
            d = relu_backward(d, c.pre3);
            ConvGrads g3 = conv1d_backward(d, piece_matrix(model.params, layout.conv_w(b, j, 2))
                                                  .transpose(),
                                           c.patches3, arch.channel_plan[1]);
            add_matrix_grad(grad, layout.conv_w(b, j, 2), g3.d_weights);
            add_vector_grad(grad, layout.conv_b(b, j, 2), g3.d_bias);

            d = avg_pool_backward(g3.d_input, lens[1]);
            d = relu_backward(d, c.pre2);
            ConvGrads g2 = conv1d_backward(d, piece_matrix(model.params, layout.conv_w(b, j, 1))
                                                  .transpose(),
                                           c.patches2, arch.channel_plan[0]);
            add_matrix_grad(grad, layout.conv_w(b, j, 1), g2.d_weights);
            add_vector_grad(grad, layout.conv_b(b, j, 1), g2.d_bias);

            d = avg_pool_backward(g2.d_input, lens[0]);
            d = relu_backward(d, c.pre1);
            ConvGrads g1 = conv1d_backward(d, piece_matrix(model.params, layout.conv_w(b, j, 0))
                                                  .transpose(),
                                           c.patches1, 1);
            add_matrix_grad(grad, layout.conv_w(b, j, 0), g1.d_weights);
            add_vector_grad(grad, layout.conv_b(b, j, 0), g1.d_bias);
        }
    }
    return loss;
}

double sample_loss(const CnnModel& model, const NormalizedSample& sample) {
    if (sample.target.size() != model.arch.outputs) {
        throw std::invalid_argument("sample_loss: target size mismatch");
    }
    const VectorXd out = forward(model, sample);
    return (out - sample.target).squaredNorm() / model.arch.outputs;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamState& state) {
    if (params.size() != grad.size() || params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    if (!grad.allFinite()) {
        throw std::invalid_argument("adam_step: non-finite gradient");
    }
    state.step += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    const Eigen::ArrayXd m_hat = state.m.array() / bc1;
    const Eigen::ArrayXd v_hat = state.v.array() / bc2;
    params.array() -= state.alpha * m_hat / (v_hat.sqrt() + state.eps);
}

}  // namespace evrk::pce
