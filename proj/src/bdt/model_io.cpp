#include "evrk/bdt/model_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "evrk/core/binio.hpp"

namespace evrk::bdt {
namespace {

constexpr char kMagic[4] = {'B', 'D', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void write_subtree(std::ostream& out, const RegressionTree& tree, std::int32_t index) {
    if (index < 0 || static_cast<std::size_t>(index) >= tree.nodes.size()) {
        throw std::invalid_argument("save_model: tree has a dangling child index");
    }
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    core::write_u8(out, node.feature);
    core::write_f64(out, node.value);
    core::write_u8(out, node.is_leaf() ? 1 : 0);
    if (!node.is_leaf()) {
        write_subtree(out, tree, node.left);
        write_subtree(out, tree, node.right);
    }
}

std::int32_t read_subtree(std::istream& in, RegressionTree& tree) {
    TreeNode node;
    node.feature = core::read_u8(in);
    node.value = core::read_f64(in);
    const std::uint8_t leaf = core::read_u8(in);
    if (leaf > 1) throw std::invalid_argument("load_model: bad leaf flag");
    const auto me = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.push_back(node);
    if (leaf == 0) {
        const std::int32_t l = read_subtree(in, tree);
        const std::int32_t r = read_subtree(in, tree);
        tree.nodes[static_cast<std::size_t>(me)].left = l;
        tree.nodes[static_cast<std::size_t>(me)].right = r;
    }
    return me;
}

}  // namespace

void save_model(const std::string& path, const BdtModel& model) {
    if (model.trees.empty()) throw std::invalid_argument("save_model: empty ensemble");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    core::write_u32(out, kVersion);
    core::write_u32(out, static_cast<std::uint32_t>(model.trees.size()));
    for (const auto& tree : model.trees) {
        if (tree.nodes.empty()) throw std::invalid_argument("save_model: empty tree");
        write_subtree(out, tree, 0);
    }
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

BdtModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("load_model: cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::invalid_argument("load_model: not a fine-tuner model file");
    }
    if (core::read_u32(in) != kVersion) {
        throw std::invalid_argument("load_model: unsupported version");
    }
    const std::uint32_t count = core::read_u32(in);
    if (count == 0) throw std::invalid_argument("load_model: empty ensemble");

    BdtModel model;
    model.trees.resize(count);
    int max_feature = -1;
    for (auto& tree : model.trees) {
        read_subtree(in, tree);
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) max_feature = std::max(max_feature, int(node.feature));
        }
    }
    model.n_features = max_feature + 1;
    return model;
}

}  // namespace evrk::bdt
