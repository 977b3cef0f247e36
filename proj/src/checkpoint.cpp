#include "score/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace score {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'O', 'R', 'E', 'C', 'K', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t read_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return v;
}

void write_doubles(std::ostream& out, std::span<const double> v) {
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::span<double> v) {
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated tensor data");
}

nlohmann::json spec_to_json(const SemanticSpec& spec, const CodeMatrix& codes) {
    nlohmann::json j;
    j["class_names"] = codes.class_names;
    j["semantics"] = nlohmann::json::array();
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& s = spec.semantics[k];
        nlohmann::json js;
        js["name"] = s.name;
        js["kind"] = to_string(s.kind);
        js["state_count"] = s.state_count;
        js["state_dim"] = s.state_dim;
        js["state_names"] = s.state_names;
        if (s.discrete()) js["states"] = codes.state_table[k];
        j["semantics"].push_back(js);
    }
    return j;
}

} // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");

    nlohmann::json header;
    header["model_config"] = {
        {"mode", to_string(ckpt.model_config.mode)},
        {"lambda", ckpt.model_config.lambda},
        {"beta", ckpt.model_config.beta},
        {"codeword_path", to_string(ckpt.model_config.codeword_path)},
        {"omega_form", to_string(ckpt.model_config.omega_form)},
        {"backbone_widths", ckpt.model_config.backbone_widths},
    };
    header["train_config"] = {
        {"learning_rate", ckpt.train_config.learning_rate},
        {"momentum", ckpt.train_config.momentum},
        {"weight_decay", ckpt.train_config.weight_decay},
        {"epochs", ckpt.train_config.epochs},
        {"batch_size", ckpt.train_config.batch_size},
        {"lr_decay", ckpt.train_config.lr_decay},
        {"seed", ckpt.train_config.seed},
    };
    header["semantics"] = spec_to_json(ckpt.spec, ckpt.codes);
    header["input_dim"] = ckpt.params.input_dim();
    header["current_lr"] = ckpt.opt_state.current_lr;
    header["epochs_done"] = ckpt.opt_state.epochs_done;

    const std::string htext = header.dump();
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, htext.size());
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));

    // tensor order: semantic codewords, phi, then params and velocities
    for (const auto& s : ckpt.spec.semantics)
        if (s.discrete()) write_doubles(out, s.state_codewords.values());
    write_doubles(out, ckpt.codes.phi.values());
    for (const ModelParams* p : {&ckpt.params, &ckpt.opt_state.velocity}) {
        for (const auto& layer : p->backbone) {
            write_doubles(out, layer.weight.values());
            write_doubles(out, layer.bias);
        }
        write_doubles(out, p->projection.values());
        if (!p->dense_codewords.empty()) write_doubles(out, p->dense_codewords.values());
        for (const auto& w : p->state_codewords) write_doubles(out, w.values());
    }
    if (!out) throw DataError("write failure on '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("'" + path + "' is not a checkpoint file");
    const std::uint64_t hlen = read_u64(in);
    std::string htext(hlen, '\0');
    in.read(htext.data(), static_cast<std::streamsize>(hlen));
    if (!in) throw DataError("checkpoint: truncated header");

    Checkpoint ckpt;
    std::size_t input_dim = 0;
    try {
        const nlohmann::json header = nlohmann::json::parse(htext);
        const auto& mc = header.at("model_config");
        ckpt.model_config.mode = mode_from_string(mc.at("mode").get<std::string>());
        ckpt.model_config.lambda = mc.at("lambda").get<double>();
        ckpt.model_config.beta = mc.at("beta").get<double>();
        ckpt.model_config.codeword_path =
            codeword_path_from_string(mc.at("codeword_path").get<std::string>());
        ckpt.model_config.omega_form =
            omega_form_from_string(mc.at("omega_form").get<std::string>());
        ckpt.model_config.backbone_widths =
            mc.at("backbone_widths").get<std::vector<std::size_t>>();

        const auto& tc = header.at("train_config");
        ckpt.train_config.learning_rate = tc.at("learning_rate").get<double>();
        ckpt.train_config.momentum = tc.at("momentum").get<double>();
        ckpt.train_config.weight_decay = tc.at("weight_decay").get<double>();
        ckpt.train_config.epochs = tc.at("epochs").get<std::size_t>();
        ckpt.train_config.batch_size = tc.at("batch_size").get<std::size_t>();
        ckpt.train_config.lr_decay = tc.at("lr_decay").get<double>();
        ckpt.train_config.seed = tc.at("seed").get<std::uint64_t>();

        const auto& sem = header.at("semantics");
        ckpt.codes.class_names = sem.at("class_names").get<std::vector<std::string>>();
        for (const auto& js : sem.at("semantics")) {
            SemanticDef def;
            def.name = js.at("name").get<std::string>();
            def.kind = semantic_kind_from_string(js.at("kind").get<std::string>());
            def.state_count = js.at("state_count").get<std::size_t>();
            def.state_dim = js.at("state_dim").get<std::size_t>();
            def.state_names = js.at("state_names").get<std::vector<std::string>>();
            if (def.kind != SemanticKind::ContinuousAttribute) {
                def.state_codewords = Matrix(def.state_dim, def.state_count);
                ckpt.codes.state_table.push_back(js.at("states").get<std::vector<int>>());
            } else {
                ckpt.codes.state_table.emplace_back();
            }
            ckpt.spec.semantics.push_back(std::move(def));
        }
        input_dim = header.at("input_dim").get<std::size_t>();
        ckpt.opt_state.current_lr = header.at("current_lr").get<double>();
        ckpt.opt_state.epochs_done = header.at("epochs_done").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed checkpoint header: " + e.what());
    }

    for (auto& s : ckpt.spec.semantics)
        if (s.discrete()) read_doubles(in, s.state_codewords.values());
    ckpt.codes.phi = Matrix(ckpt.spec.total_dim(), ckpt.codes.class_names.size());
    read_doubles(in, ckpt.codes.phi.values());

    // rebuild parameter shapes, then fill
    std::size_t prev = input_dim;
    for (const std::size_t width : ckpt.model_config.backbone_widths) {
        ckpt.params.backbone.push_back({Matrix(width, prev), std::vector<double>(width, 0.0)});
        prev = width;
    }
    ckpt.params.projection = Matrix(prev, ckpt.spec.total_dim());
    if (ckpt.model_config.codeword_path == CodewordPath::Dense) {
        ckpt.params.dense_codewords =
            Matrix(ckpt.spec.total_dim(), ckpt.codes.class_names.size());
    } else {
        for (const auto& s : ckpt.spec.semantics)
            ckpt.params.state_codewords.push_back(Matrix(s.state_dim, s.state_count));
    }
    ckpt.opt_state.velocity = zeros_like(ckpt.params);
    for (ModelParams* p : {&ckpt.params, &ckpt.opt_state.velocity}) {
        for (auto& layer : p->backbone) {
            read_doubles(in, layer.weight.values());
            read_doubles(in, layer.bias);
        }
        read_doubles(in, p->projection.values());
        if (!p->dense_codewords.empty()) read_doubles(in, p->dense_codewords.values());
        for (auto& w : p->state_codewords) read_doubles(in, w.values());
    }
    validate_code_matrix(ckpt.spec, ckpt.codes);
    return ckpt;
}

} // namespace score
