#include "score/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace score {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    return out;
}

std::string loc(const std::string& path, std::size_t line_no) {
    return path + ":" + std::to_string(line_no);
}

void check_csv_safe(const std::string& name, const std::string& what) {
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
        throw DataError(what + " '" + name + "' contains a comma or newline");
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& context, std::size_t line_no) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
        throw DataError(context + ": non-numeric field '" + t + "' at line " +
                        std::to_string(line_no));
    return v;
}

void FeatureSet::validate() const {
    const std::size_t n = features.rows();
    if (labels.size() != n || sample_ids.size() != n)
        throw ContractError("feature set: labels/ids do not match the sample count");
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= class_names.size())
            throw ContractError("feature set: label " + std::to_string(y) + " out of range");
    if (!sample_attributes.empty() && sample_attributes.rows() != n)
        throw ContractError("feature set: attribute label rows do not match the sample count");
}

void SplitSpec::validate() const {
    std::set<std::string> seen;
    for (const auto* part : {&train_classes, &zs_classes, &validation_classes})
        for (const auto& c : *part)
            if (!seen.insert(c).second)
                throw DataError("split: class '" + c + "' appears in more than one section");
}

void SyntheticConfig::validate() const {
    if (q == 0 || c_train == 0 || c_zs == 0 || d == 0 || n_per_class == 0)
        throw ContractError("synthetic config: all sizes must be positive");
    if (noise_sigma < 0.0) throw ContractError("synthetic config: sigma must be >= 0");
    if (misalignment < 0.0 || misalignment > 1.0)
        throw ContractError("synthetic config: misalignment must be in [0,1]");
    if (q < 63 && (1ULL << q) < c_train + c_zs)
        throw ContractError("synthetic config: 2^q must cover all classes");
}

// ---------------------------------------------------------------------------
// Class lists / features
// ---------------------------------------------------------------------------

std::vector<std::string> load_class_list(const std::string& path) {
    auto in = open_input(path);
    std::vector<std::string> classes;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (!seen.insert(t).second)
            throw DataError(loc(path, line_no) + ": duplicate class '" + t + "'");
        classes.push_back(t);
    }
    if (classes.empty()) throw DataError(path + ": no classes listed");
    return classes;
}

void save_class_list(const std::string& path, const std::vector<std::string>& classes) {
    auto out = open_output(path);
    for (const auto& c : classes) out << c << "\n";
}

FeatureSet load_features(const std::string& path, const std::vector<std::string>& class_names) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 3 || trim(header[0]) != "id" || trim(header[1]) != "label")
        throw DataError(path + ":1: expected header 'id,label,f0,...'");
    const std::size_t d = header.size() - 2;

    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != d + 2)
            throw DataError(loc(path, line_no) + ": expected " + std::to_string(d + 2) +
                            " fields, found " + std::to_string(cells.size()));
        ids.push_back(trim(cells[0]));
        const std::string cls = trim(cells[1]);
        const auto it = std::find(class_names.begin(), class_names.end(), cls);
        if (it == class_names.end())
            throw DataError(loc(path, line_no) + ": unknown class '" + cls + "'");
        labels.push_back(static_cast<int>(it - class_names.begin()));
        for (std::size_t j = 0; j < d; ++j)
            values.push_back(parse_double(cells[j + 2], path, line_no));
    }

    FeatureSet fs;
    fs.features = Matrix(ids.size(), d);
    std::copy(values.begin(), values.end(), fs.features.data());
    fs.labels = std::move(labels);
    fs.sample_ids = std::move(ids);
    fs.class_names = class_names;
    fs.validate();
    return fs;
}

void save_features(const std::string& path, const FeatureSet& fs) {
    fs.validate();
    auto out = open_output(path);
    out << "id,label";
    for (std::size_t j = 0; j < fs.features.cols(); ++j) out << ",f" << j;
    out << "\n";
    for (std::size_t i = 0; i < fs.size(); ++i) {
        check_csv_safe(fs.sample_ids[i], "sample id");
        const std::string& cls = fs.class_names[static_cast<std::size_t>(fs.labels[i])];
        check_csv_safe(cls, "class name");
        out << fs.sample_ids[i] << ',' << cls;
        for (const double v : fs.features.row(i)) out << ',' << format_double(v);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Attribute matrices
// ---------------------------------------------------------------------------

AttributeMatrix load_attribute_matrix(const std::string& path, bool binary) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 2) throw DataError(path + ":1: expected 'class,<attribute names>'");
    AttributeMatrix am;
    am.binary = binary;
    for (std::size_t j = 1; j < header.size(); ++j) am.attribute_names.push_back(trim(header[j]));
    const std::size_t q = am.attribute_names.size();

    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != q + 1)
            throw DataError(loc(path, line_no) + ": expected " + std::to_string(q + 1) +
                            " fields, found " + std::to_string(cells.size()));
        am.class_names.push_back(trim(cells[0]));
        for (std::size_t j = 0; j < q; ++j) {
            const double v = parse_double(cells[j + 1], path, line_no);
            if (std::isnan(v)) throw DataError(loc(path, line_no) + ": NaN cell");
            values.push_back(v);
        }
    }
    if (am.class_names.empty()) throw DataError(path + ": no class rows");
    am.values = Matrix(am.class_names.size(), q);
    std::copy(values.begin(), values.end(), am.values.data());

    if (binary) {
        bool has_minus = false, has_zero = false;
        for (double v : am.values.values()) {
            if (v == -1.0) has_minus = true;
            else if (v == 0.0) has_zero = true;
            else if (v != 1.0)
                throw DataError(path + ": binary attribute value must be 0/1 or -1/+1, got " +
                                format_double(v));
        }
        if (has_minus && has_zero)
            throw DataError(path + ": mixed 0/1 and -1/+1 binary conventions");
        if (has_zero)
            for (double& v : am.values.values())
                if (v == 0.0) v = -1.0;
    } else {
        // per-attribute min-max rescale to [-1,1]; idempotent once applied
        am.rescale_bounds.resize(q);
        for (std::size_t j = 0; j < q; ++j) {
            double lo = am.values(0, j), hi = am.values(0, j);
            for (std::size_t c = 0; c < am.values.rows(); ++c) {
                lo = std::min(lo, am.values(c, j));
                hi = std::max(hi, am.values(c, j));
            }
            am.rescale_bounds[j] = {lo, hi};
            if (lo == hi) {
                am.notes.push_back("attribute '" + am.attribute_names[j] +
                                   "' is constant; rescaled to all zeros");
                for (std::size_t c = 0; c < am.values.rows(); ++c) am.values(c, j) = 0.0;
            } else {
                for (std::size_t c = 0; c < am.values.rows(); ++c)
                    am.values(c, j) = 2.0 * (am.values(c, j) - lo) / (hi - lo) - 1.0;
            }
        }
    }
    return am;
}

void save_attribute_matrix(const std::string& path, const AttributeMatrix& am) {
    auto out = open_output(path);
    out << "class";
    for (const auto& a : am.attribute_names) {
        check_csv_safe(a, "attribute name");
        out << ',' << a;
    }
    out << "\n";
    for (std::size_t c = 0; c < am.values.rows(); ++c) {
        check_csv_safe(am.class_names[c], "class name");
        out << am.class_names[c];
        for (const double v : am.values.row(c)) out << ',' << format_double(v);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Taxonomy files
// ---------------------------------------------------------------------------

Taxonomy load_taxonomy(const std::string& path) {
    auto in = open_input(path);
    Taxonomy raw;
    std::vector<int> stack; // node index per depth
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line)[0] == '#') continue;
        std::size_t depth = 0;
        while (depth < line.size() && line[depth] == '\t') ++depth;
        std::string body = trim(line.substr(depth));

        std::string label = body;
        std::vector<std::string> classes;
        if (const auto eq = body.find('='); eq != std::string::npos) {
            label = trim(body.substr(0, eq));
            for (const auto& c : split_csv(body.substr(eq + 1))) {
                const std::string cls = trim(c);
                if (cls.empty())
                    throw DataError(loc(path, line_no) + ": empty class name after '='");
                classes.push_back(cls);
            }
            if (classes.empty())
                throw DataError(loc(path, line_no) + ": '=' with no class names");
        }
        if (label.empty()) throw DataError(loc(path, line_no) + ": node has no name");

        if (depth > stack.size())
            throw DataError(loc(path, line_no) + ": depth jumps by more than one level");
        stack.resize(depth);

        const int idx = static_cast<int>(raw.nodes.size());
        raw.nodes.push_back({label, {}, {}});
        if (depth == 0) {
            if (raw.root >= 0) throw DataError(loc(path, line_no) + ": multiple root nodes");
            raw.root = idx;
        } else {
            raw.nodes[static_cast<std::size_t>(stack.back())].children.push_back(idx);
        }
        stack.push_back(idx);

        if (classes.size() == 1) {
            raw.nodes[static_cast<std::size_t>(idx)].class_name = classes[0];
        } else if (classes.size() > 1) {
            // several classes on one leaf: give each its own child leaf
            for (const auto& cls : classes) {
                const int leaf = static_cast<int>(raw.nodes.size());
                raw.nodes.push_back({cls, {}, cls});
                raw.nodes[static_cast<std::size_t>(idx)].children.push_back(leaf);
            }
        }
    }
    if (raw.root < 0) throw DataError(path + ": no root node");
    for (const auto& n : raw.nodes)
        if (!n.class_name.empty() && !n.children.empty())
            throw DataError(path + ": node '" + n.name + "' is annotated with a class but has children");
    try {
        return normalize_taxonomy(std::move(raw));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Embedding files
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

bool is_count_header(const std::vector<std::string>& tokens) {
    if (tokens.size() != 2) return false;
    for (const auto& t : tokens)
        for (char ch : t)
            if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    return true;
}

} // namespace

EmbeddingTable load_embedding_file(const std::string& path) {
    auto in = open_input(path);
    EmbeddingTable table;
    table.name = std::filesystem::path(path).stem().string();

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_data = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto tokens = split_ws(line);
        if (first_data && is_count_header(tokens)) { first_data = false; continue; }
        first_data = false;
        if (tokens.size() < 2)
            throw DataError(loc(path, line_no) + ": expected 'word v1 v2 ...'");
        const std::string& word = tokens[0];
        if (table.index.contains(word))
            throw DataError(loc(path, line_no) + ": duplicate word '" + word + "'");
        std::vector<double> v;
        for (std::size_t j = 1; j < tokens.size(); ++j)
            v.push_back(parse_double(tokens[j], path, line_no));
        if (table.dim == 0) table.dim = v.size();
        if (v.size() != table.dim)
            throw DataError(loc(path, line_no) + ": vector has " + std::to_string(v.size()) +
                            " dimensions, expected " + std::to_string(table.dim));
        table.index.emplace(word, table.words.size());
        table.words.push_back(word);
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw DataError(path + ": no vectors");
    table.vectors = Matrix(rows.size(), table.dim);
    for (std::size_t r = 0; r < rows.size(); ++r) table.vectors.set_row(r, rows[r]);
    return table;
}

ResolvedVectors load_embeddings(const std::string& path, const std::vector<std::string>& classes) {
    return resolve_class_vectors(load_embedding_file(path), classes);
}

// ---------------------------------------------------------------------------
// Split files
// ---------------------------------------------------------------------------

SplitSpec load_split(const std::string& path) {
    auto in = open_input(path);
    SplitSpec split;
    std::vector<std::string>* section = nullptr;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t == "[train]") { section = &split.train_classes; continue; }
        if (t == "[zs]") { section = &split.zs_classes; continue; }
        if (t == "[validation]") { section = &split.validation_classes; continue; }
        if (t[0] == '[') throw DataError(loc(path, line_no) + ": unknown section " + t);
        if (section == nullptr)
            throw DataError(loc(path, line_no) + ": class name before any section header");
        section->push_back(t);
    }
    split.validate();
    return split;
}

void save_split(const std::string& path, const SplitSpec& split) {
    auto out = open_output(path);
    out << "[train]\n";
    for (const auto& c : split.train_classes) out << c << "\n";
    out << "[zs]\n";
    for (const auto& c : split.zs_classes) out << c << "\n";
    out << "[validation]\n";
    for (const auto& c : split.validation_classes) out << c << "\n";
}

// ---------------------------------------------------------------------------
// Per-sample attribute labels
// ---------------------------------------------------------------------------

Matrix load_sample_attributes(const std::string& path, const std::vector<std::string>& ids) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 2 || trim(header[0]) != "id")
        throw DataError(path + ":1: expected header 'id,a0,...'");
    const std::size_t q = header.size() - 1;

    std::unordered_map<std::string, std::vector<double>> by_id;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != q + 1)
            throw DataError(loc(path, line_no) + ": expected " + std::to_string(q + 1) +
                            " fields, found " + std::to_string(cells.size()));
        std::vector<double> row;
        for (std::size_t j = 0; j < q; ++j) {
            const double v = parse_double(cells[j + 1], path, line_no);
            if (v != 0.0 && v != 1.0)
                throw DataError(loc(path, line_no) + ": attribute label must be 0 or 1");
            row.push_back(v);
        }
        if (!by_id.emplace(trim(cells[0]), std::move(row)).second)
            throw DataError(loc(path, line_no) + ": duplicate sample id");
    }

    Matrix attrs(ids.size(), q);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto it = by_id.find(ids[i]);
        if (it == by_id.end())
            throw DataError(path + ": no attribute row for sample '" + ids[i] + "'");
        attrs.set_row(i, it->second);
    }
    return attrs;
}

void save_sample_attributes(const std::string& path, const std::vector<std::string>& ids,
                            const Matrix& attrs) {
    if (ids.size() != attrs.rows())
        throw ContractError("save_sample_attributes: id count does not match rows");
    auto out = open_output(path);
    out << "id";
    for (std::size_t j = 0; j < attrs.cols(); ++j) out << ",a" << j;
    out << "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        check_csv_safe(ids[i], "sample id");
        out << ids[i];
        for (const double v : attrs.row(i)) out << ',' << format_double(v);
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Code matrix files
// ---------------------------------------------------------------------------

void save_code_matrix(const std::string& base, const SemanticSpec& spec, const CodeMatrix& codes) {
    validate_code_matrix(spec, codes);
    // human-readable CSV view
    {
        auto out = open_output(base + ".csv");
        out << "dim";
        for (const auto& c : codes.class_names) {
            check_csv_safe(c, "class name");
            out << ',' << c;
        }
        out << "\n";
        const auto off = spec.offsets();
        for (std::size_t k = 0; k < spec.semantics.size(); ++k)
            for (std::size_t j = 0; j < spec.semantics[k].state_dim; ++j) {
                check_csv_safe(spec.semantics[k].name, "semantic name");
                out << spec.semantics[k].name << ':' << j;
                for (std::size_t c = 0; c < codes.class_count(); ++c)
                    out << ',' << format_double(codes.phi(off[k] + j, c));
                out << "\n";
            }
    }
    // exact JSON sidecar
    nlohmann::json j;
    j["format"] = "score-codes";
    j["version"] = 1;
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
        if (s.discrete()) {
            auto cw = nlohmann::json::array();
            for (std::size_t r = 0; r < s.state_codewords.rows(); ++r)
                cw.push_back(std::vector<double>(s.state_codewords.row(r).begin(),
                                                 s.state_codewords.row(r).end()));
            js["state_codewords"] = cw;
            js["states"] = codes.state_table[k];
        }
        j["semantics"].push_back(js);
    }
    auto phi = nlohmann::json::array();
    for (std::size_t r = 0; r < codes.phi.rows(); ++r)
        phi.push_back(std::vector<double>(codes.phi.row(r).begin(), codes.phi.row(r).end()));
    j["phi"] = phi;
    auto out = open_output(base + ".meta.json");
    out << j.dump(1) << "\n";
}

std::pair<SemanticSpec, CodeMatrix> load_code_matrix(const std::string& base) {
    const std::string meta_path = base + ".meta.json";
    auto in = open_input(meta_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path + ": " + e.what());
    }
    try {
        if (j.at("format") != "score-codes")
            throw DataError(meta_path + ": not a code matrix file");
        SemanticSpec spec;
        CodeMatrix codes;
        codes.class_names = j.at("class_names").get<std::vector<std::string>>();
        for (const auto& js : j.at("semantics")) {
            SemanticDef def;
            def.name = js.at("name").get<std::string>();
            def.kind = semantic_kind_from_string(js.at("kind").get<std::string>());
            def.state_count = js.at("state_count").get<std::size_t>();
            def.state_dim = js.at("state_dim").get<std::size_t>();
            def.state_names = js.at("state_names").get<std::vector<std::string>>();
            if (def.kind != SemanticKind::ContinuousAttribute) {
                const auto& cw = js.at("state_codewords");
                def.state_codewords = Matrix(def.state_dim, def.state_count);
                for (std::size_t r = 0; r < def.state_dim; ++r) {
                    const auto row = cw.at(r).get<std::vector<double>>();
                    def.state_codewords.set_row(r, row);
                }
                codes.state_table.push_back(js.at("states").get<std::vector<int>>());
            } else {
                codes.state_table.emplace_back();
            }
            spec.semantics.push_back(std::move(def));
        }
        const auto& phi = j.at("phi");
        codes.phi = Matrix(phi.size(), codes.class_names.size());
        for (std::size_t r = 0; r < codes.phi.rows(); ++r) {
            const auto row = phi.at(r).get<std::vector<double>>();
            codes.phi.set_row(r, row);
        }
        validate_code_matrix(spec, codes);
        return {std::move(spec), std::move(codes)};
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path + ": " + e.what());
    } catch (const ContractError& e) {
        throw DataError(meta_path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

std::string padded(const std::string& prefix, std::size_t i) {
    std::string n = std::to_string(i);
    if (n.size() < 2) n = "0" + n;
    return prefix + n;
}

bool row_in(const Matrix& codes, std::size_t upto, std::span<const double> candidate) {
    for (std::size_t r = 0; r < upto; ++r) {
        bool same = true;
        for (std::size_t j = 0; j < codes.cols() && same; ++j)
            same = codes(r, j) == candidate[j];
        if (same) return true;
    }
    return false;
}

} // namespace

SyntheticTask generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    RngStream rng(config.seed);
    const std::size_t c_all = config.c_train + config.c_zs;
    constexpr std::size_t kMaxResamples = 10000;

    // distinct sign codes, train classes first
    Matrix codes(c_all, config.q);
    for (std::size_t c = 0; c < c_all; ++c) {
        std::size_t attempts = 0;
        while (true) {
            const Matrix cand = random_sign(1, config.q, rng);
            if (!row_in(codes, c, cand.row(0))) {
                codes.set_row(c, cand.row(0));
                break;
            }
            if (++attempts >= kMaxResamples)
                throw NumericError("synthetic generator: could not sample distinct codes after " +
                                   std::to_string(kMaxResamples) + " attempts");
        }
    }

    // push ZS codes away from the span of training codes
    if (config.misalignment > 0.0) {
        Matrix train_cols(config.q, config.c_train);
        for (std::size_t c = 0; c < config.c_train; ++c) train_cols.set_col(c, codes.row(c));
        const Matrix basis = orthonormal_basis(train_cols);
        const bool possible = basis.cols() < config.q;
        for (std::size_t z = 0; z < config.c_zs; ++z) {
            if (rng.uniform() >= config.misalignment) continue;
            if (!possible) continue; // training codes span everything
            const std::size_t row = config.c_train + z;
            std::vector<double> best;
            double best_dist = -1.0;
            for (std::size_t attempt = 0; attempt < kMaxResamples; ++attempt) {
                const Matrix cand = random_sign(1, config.q, rng);
                if (row_in(codes, c_all, cand.row(0))) continue;
                std::vector<double> unit(cand.row(0).begin(), cand.row(0).end());
                const double n = norm2(unit);
                for (double& v : unit) v /= n;
                const double dist = distance_to_span(basis, unit);
                if (dist > best_dist) {
                    best_dist = dist;
                    best.assign(cand.row(0).begin(), cand.row(0).end());
                }
                if (dist >= 0.5) break;
            }
            if (!best.empty()) codes.set_row(row, best);
        }
    }

    // mixing matrix and features
    const Matrix mixing =
        scaled(random_normal(config.d, config.q, 0.0, 1.0, rng),
               1.0 / std::sqrt(static_cast<double>(config.q)));

    SyntheticTask task;
    for (std::size_t c = 0; c < config.c_train; ++c)
        task.split.train_classes.push_back(padded("train_", c));
    for (std::size_t z = 0; z < config.c_zs; ++z)
        task.split.zs_classes.push_back(padded("zs_", z));

    auto make_set = [&](std::size_t first_class, std::size_t n_classes,
                        const std::vector<std::string>& names) {
        FeatureSet fs;
        fs.class_names = names;
        const std::size_t n = n_classes * config.n_per_class;
        fs.features = Matrix(n, config.d);
        fs.sample_attributes = Matrix(n, config.q);
        std::size_t i = 0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            const std::vector<double> mean = matvec(mixing, codes.row(first_class + c));
            for (std::size_t s = 0; s < config.n_per_class; ++s, ++i) {
                for (std::size_t jd = 0; jd < config.d; ++jd)
                    fs.features(i, jd) = mean[jd] + config.noise_sigma * rng.normal();
                for (std::size_t jq = 0; jq < config.q; ++jq)
                    fs.sample_attributes(i, jq) = (codes(first_class + c, jq) + 1.0) / 2.0;
                fs.labels.push_back(static_cast<int>(c));
                fs.sample_ids.push_back(names[c] + "_s" + std::to_string(s));
            }
        }
        fs.validate();
        return fs;
    };
    task.train = make_set(0, config.c_train, task.split.train_classes);
    task.zs = make_set(config.c_train, config.c_zs, task.split.zs_classes);

    task.attributes.binary = true;
    task.attributes.values = codes;
    task.attributes.class_names = task.split.train_classes;
    task.attributes.class_names.insert(task.attributes.class_names.end(),
                                       task.split.zs_classes.begin(),
                                       task.split.zs_classes.end());
    for (std::size_t jq = 0; jq < config.q; ++jq)
        task.attributes.attribute_names.push_back("attr" + std::to_string(jq));
    return task;
}

} // namespace score
