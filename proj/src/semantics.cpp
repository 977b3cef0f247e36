#include "score/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace score {

std::string to_string(SemanticKind k) {
    switch (k) {
    case SemanticKind::BinaryAttribute: return "binary_attribute";
    case SemanticKind::ContinuousAttribute: return "continuous_attribute";
    case SemanticKind::TaxonomyNode: return "taxonomy_node";
    case SemanticKind::Embedding: return "embedding";
    }
    return "?";
}

SemanticKind semantic_kind_from_string(const std::string& s) {
    if (s == "binary_attribute") return SemanticKind::BinaryAttribute;
    if (s == "continuous_attribute") return SemanticKind::ContinuousAttribute;
    if (s == "taxonomy_node") return SemanticKind::TaxonomyNode;
    if (s == "embedding") return SemanticKind::Embedding;
    throw DataError("unknown semantic kind '" + s + "'");
}

std::size_t SemanticSpec::total_dim() const {
    std::size_t q = 0;
    for (const auto& s : semantics) q += s.state_dim;
    return q;
}

std::vector<std::size_t> SemanticSpec::offsets() const {
    std::vector<std::size_t> off(semantics.size() + 1, 0);
    for (std::size_t k = 0; k < semantics.size(); ++k) off[k + 1] = off[k] + semantics[k].state_dim;
    return off;
}

void SemanticSpec::validate() const {
    std::set<std::string> names;
    for (const auto& s : semantics) {
        if (!names.insert(s.name).second)
            throw ContractError("duplicate semantic name '" + s.name + "'");
        switch (s.kind) {
        case SemanticKind::BinaryAttribute:
            if (s.state_count != 2 || s.state_dim != 1)
                throw ContractError("binary attribute '" + s.name + "' must have 2 states of dim 1");
            if (s.state_codewords(0, 0) != 1.0 || s.state_codewords(0, 1) != -1.0)
                throw ContractError("binary attribute '" + s.name + "' codewords must be {+1,-1}");
            break;
        case SemanticKind::ContinuousAttribute:
            if (s.state_dim != 1)
                throw ContractError("continuous attribute '" + s.name + "' must have dim 1");
            break;
        case SemanticKind::TaxonomyNode:
            if (s.state_count < 3 || s.state_dim != s.state_count - 1)
                throw ContractError("taxonomy node '" + s.name + "' has inconsistent state layout");
            break;
        case SemanticKind::Embedding:
            if (s.state_count < 1 || s.state_dim < 1)
                throw ContractError("embedding semantic '" + s.name + "' is empty");
            break;
        }
        if (s.discrete() &&
            (s.state_codewords.rows() != s.state_dim || s.state_codewords.cols() != s.state_count))
            throw ContractError("semantic '" + s.name + "' codeword matrix is " +
                                s.state_codewords.shape_str() + ", expected " +
                                std::to_string(s.state_dim) + "x" + std::to_string(s.state_count));
    }
}

int CodeMatrix::class_index(const std::string& name) const {
    for (std::size_t c = 0; c < class_names.size(); ++c)
        if (class_names[c] == name) return static_cast<int>(c);
    return -1;
}

void validate_code_matrix(const SemanticSpec& spec, const CodeMatrix& codes) {
    spec.validate();
    const std::size_t q = spec.total_dim();
    const std::size_t c_count = codes.class_count();
    if (codes.phi.rows() != q)
        throw ContractError("code matrix has " + std::to_string(codes.phi.rows()) +
                            " rows, spec expects " + std::to_string(q));
    if (codes.class_names.size() != c_count)
        throw ContractError("code matrix class name count mismatch");
    if (codes.state_table.size() != spec.semantics.size())
        throw ContractError("state table covers " + std::to_string(codes.state_table.size()) +
                            " semantics, spec has " + std::to_string(spec.semantics.size()));
    check_finite(codes.phi, "code matrix");

    const auto off = spec.offsets();
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& sem = spec.semantics[k];
        const auto& states = codes.state_table[k];
        if (!sem.discrete()) {
            if (!states.empty())
                throw ContractError("continuous semantic '" + sem.name + "' carries a state table");
            for (std::size_t c = 0; c < c_count; ++c) {
                const double v = codes.phi(off[k], c);
                if (v < -1.0 || v > 1.0)
                    throw ContractError("continuous code for class '" + codes.class_names[c] +
                                        "', semantic '" + sem.name + "' is out of [-1,1]: " +
                                        std::to_string(v));
            }
            continue;
        }
        if (states.size() != c_count)
            throw ContractError("state table for '" + sem.name + "' has wrong length");
        for (std::size_t c = 0; c < c_count; ++c) {
            const int s = states[c];
            if (s < 0) {
                if (sem.kind != SemanticKind::Embedding)
                    throw ContractError("class '" + codes.class_names[c] + "' lacks a state for '" +
                                        sem.name + "'");
                continue; // unseen embedding class: slice carries its own vector
            }
            if (static_cast<std::size_t>(s) >= sem.state_count)
                throw ContractError("state index out of range for '" + sem.name + "'");
            for (std::size_t j = 0; j < sem.state_dim; ++j) {
                if (codes.phi(off[k] + j, c) != sem.state_codewords(j, static_cast<std::size_t>(s)))
                    throw ContractError("code slice for class '" + codes.class_names[c] +
                                        "', semantic '" + sem.name +
                                        "' does not equal its state codeword");
            }
        }
    }

    for (std::size_t a = 0; a < c_count; ++a)
        for (std::size_t b = a + 1; b < c_count; ++b) {
            bool same = true;
            for (std::size_t r = 0; r < q && same; ++r) same = codes.phi(r, a) == codes.phi(r, b);
            if (same)
                throw ContractError("classes '" + codes.class_names[a] + "' and '" +
                                    codes.class_names[b] + "' share an identical code");
        }
}

// ---------------------------------------------------------------------------
// Maximally separated codewords
// ---------------------------------------------------------------------------

Matrix max_separated_codewords(std::size_t s) {
    if (s < 2) throw ContractError("max_separated_codewords: need at least 2 states, got " +
                                   std::to_string(s));
    if (s == 2) {
        Matrix m(1, 2);
        m(0, 0) = 1.0;
        m(0, 1) = -1.0;
        return m;
    }
    // First vertex on e1; the rest share first coordinate -1/(S-1) and embed
    // a scaled (S-1)-vertex simplex in the remaining dimensions.
    const Matrix inner = max_separated_codewords(s - 1);
    const double t = -1.0 / static_cast<double>(s - 1);
    const double c = std::sqrt(1.0 - t * t);
    Matrix m(s - 1, s);
    m(0, 0) = 1.0;
    for (std::size_t i = 1; i < s; ++i) {
        m(0, i) = t;
        for (std::size_t j = 0; j + 1 < s - 1; ++j) m(j + 1, i) = c * inner(j, i - 1);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Attribute codes
// ---------------------------------------------------------------------------

EncodedCodes attribute_codes(const AttributeMatrix& source) {
    const std::size_t c_count = source.values.rows();
    const std::size_t q = source.values.cols();
    if (source.class_names.size() != c_count)
        throw ContractError("attribute matrix rows do not match class name count");
    if (!source.attribute_names.empty() && source.attribute_names.size() != q)
        throw ContractError("attribute name count does not match attribute columns");

    EncodedCodes out;
    out.codes.phi = transpose(source.values);
    out.codes.class_names = source.class_names;
    out.codes.state_table.resize(q);
    for (std::size_t k = 0; k < q; ++k) {
        SemanticDef def;
        def.name = source.attribute_names.empty() ? "attr" + std::to_string(k)
                                                  : source.attribute_names[k];
        def.state_dim = 1;
        if (source.binary) {
            def.kind = SemanticKind::BinaryAttribute;
            def.state_count = 2;
            def.state_codewords = Matrix(1, 2);
            def.state_codewords(0, 0) = 1.0;
            def.state_codewords(0, 1) = -1.0;
            def.state_names = {"present", "absent"};
            out.codes.state_table[k].resize(c_count);
        } else {
            def.kind = SemanticKind::ContinuousAttribute;
            def.state_count = 0;
        }
        for (std::size_t c = 0; c < c_count; ++c) {
            const double v = source.values(c, k);
            if (source.binary) {
                if (v != 1.0 && v != -1.0)
                    throw ContractError("binary attribute value for class '" +
                                        source.class_names[c] + "', attribute '" + def.name +
                                        "' must be +/-1, got " + std::to_string(v));
                out.codes.state_table[k][c] = v == 1.0 ? 0 : 1;
            } else if (v < -1.0 || v > 1.0) {
                throw ContractError("continuous attribute value for class '" +
                                    source.class_names[c] + "', attribute '" + def.name +
                                    "' is out of [-1,1]: " + std::to_string(v));
            }
        }
        out.spec.semantics.push_back(std::move(def));
    }
    validate_code_matrix(out.spec, out.codes);
    return out;
}

// ---------------------------------------------------------------------------
// Taxonomy codes
// ---------------------------------------------------------------------------

std::vector<int> Taxonomy::internal_preorder() const {
    std::vector<int> order;
    std::vector<int> stack{root};
    // explicit stack DFS, children pushed in reverse for left-to-right order
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        if (is_leaf(i)) continue;
        order.push_back(i);
        for (auto it = nodes[i].children.rbegin(); it != nodes[i].children.rend(); ++it)
            stack.push_back(*it);
    }
    return order;
}

int Taxonomy::leaf_of_class(const std::string& cls) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (is_leaf(static_cast<int>(i)) && nodes[i].class_name == cls) return static_cast<int>(i);
    return -1;
}

namespace {

int rebuild_collapsed(const Taxonomy& in, int idx, Taxonomy& out) {
    const auto& n = in.nodes[idx];
    if (n.children.empty()) {
        out.nodes.push_back(n);
        return static_cast<int>(out.nodes.size() - 1);
    }
    if (n.children.size() == 1) return rebuild_collapsed(in, n.children[0], out); // dummy node
    const int self = static_cast<int>(out.nodes.size());
    out.nodes.push_back({n.name, {}, {}});
    for (int ch : n.children) {
        const int nc = rebuild_collapsed(in, ch, out);
        out.nodes[self].children.push_back(nc);
    }
    return self;
}

} // namespace

Taxonomy normalize_taxonomy(Taxonomy raw) {
    if (raw.root < 0 || raw.nodes.empty()) throw DataError("taxonomy is empty");
    Taxonomy out;
    out.root = rebuild_collapsed(raw, raw.root, out);
    if (out.is_leaf(out.root))
        throw DataError("taxonomy collapses to a single leaf: no internal decisions remain");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        const auto& n = out.nodes[i];
        if (out.is_leaf(static_cast<int>(i))) {
            if (n.class_name.empty())
                throw DataError("taxonomy leaf '" + n.name + "' is not bound to a class");
            if (!seen.insert(n.class_name).second)
                throw DataError("duplicate class '" + n.class_name + "' in taxonomy");
        }
    }
    return out;
}

EncodedCodes taxonomy_codes(const Taxonomy& tree, const std::vector<std::string>& classes) {
    if (tree.root < 0) throw ContractError("taxonomy_codes: malformed tree");
    const auto internal = tree.internal_preorder();
    if (internal.empty()) throw ContractError("taxonomy_codes: tree has no internal nodes");

    EncodedCodes out;
    std::vector<int> node_to_semantic(tree.nodes.size(), -1);
    for (std::size_t k = 0; k < internal.size(); ++k) {
        const auto& node = tree.nodes[internal[k]];
        node_to_semantic[internal[k]] = static_cast<int>(k);
        SemanticDef def;
        def.name = node.name;
        def.kind = SemanticKind::TaxonomyNode;
        def.state_count = node.children.size() + 1; // children plus reject
        def.state_dim = node.children.size();
        def.state_codewords = max_separated_codewords(def.state_count);
        for (int ch : node.children) def.state_names.push_back(tree.nodes[ch].name);
        def.state_names.push_back("other");
        out.spec.semantics.push_back(std::move(def));
    }

    const auto off = out.spec.offsets();
    out.codes.phi = Matrix(out.spec.total_dim(), classes.size());
    out.codes.state_table.assign(internal.size(),
                                 std::vector<int>(classes.size(), 0));
    out.codes.class_names = classes;

    for (std::size_t c = 0; c < classes.size(); ++c) {
        const int leaf = tree.leaf_of_class(classes[c]);
        if (leaf < 0)
            throw ContractError("class '" + classes[c] + "' is not reachable in the taxonomy");
        // branch taken at each ancestor of the leaf
        std::vector<int> branch(tree.nodes.size(), -1);
        std::vector<std::pair<int, std::size_t>> stack{{tree.root, 0}};
        std::vector<int> path;
        // iterative DFS tracking the current root-to-node path
        bool found = false;
        while (!stack.empty() && !found) {
            auto& [node, next_child] = stack.back();
            if (node == leaf) { found = true; break; }
            if (tree.is_leaf(node) || next_child >= tree.nodes[node].children.size()) {
                stack.pop_back();
                continue;
            }
            const int child = tree.nodes[node].children[next_child];
            ++next_child;
            stack.push_back({child, 0});
        }
        if (!found) throw ContractError("class '" + classes[c] + "' not found under the root");
        for (std::size_t i = 0; i + 1 < stack.size(); ++i) {
            const int node = stack[i].first;
            const int child = stack[i + 1].first;
            const auto& ch = tree.nodes[node].children;
            branch[node] =
                static_cast<int>(std::find(ch.begin(), ch.end(), child) - ch.begin());
        }
        for (std::size_t k = 0; k < internal.size(); ++k) {
            const int node = internal[k];
            const auto& sem = out.spec.semantics[k];
            const int state = branch[node] >= 0 ? branch[node]
                                                : static_cast<int>(sem.state_count - 1); // reject
            out.codes.state_table[k][c] = state;
            for (std::size_t j = 0; j < sem.state_dim; ++j)
                out.codes.phi(off[k] + j, c) =
                    sem.state_codewords(j, static_cast<std::size_t>(state));
        }
    }
    validate_code_matrix(out.spec, out.codes);
    return out;
}

// ---------------------------------------------------------------------------
// Embedding codes
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_tokens(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

} // namespace

ResolvedVectors resolve_class_vectors(const EmbeddingTable& table,
                                      const std::vector<std::string>& classes) {
    ResolvedVectors out;
    out.rows = Matrix(classes.size(), table.dim);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const std::string& cls = classes[c];
        auto it = table.index.find(cls);
        if (it == table.index.end()) {
            std::string joined = cls;
            std::replace(joined.begin(), joined.end(), ' ', '_');
            it = table.index.find(joined);
        }
        if (it != table.index.end()) {
            out.rows.set_row(c, table.vectors.row(it->second));
            continue;
        }
        const auto tokens = split_tokens(cls, ' ');
        bool all_found = tokens.size() > 1;
        for (const auto& t : tokens)
            if (!table.index.contains(t)) all_found = false;
        if (!all_found)
            throw DataError("embedding table '" + table.name + "': no vector resolvable for class '" +
                            cls + "'");
        for (const auto& t : tokens) {
            const auto row = table.vectors.row(table.index.at(t));
            for (std::size_t j = 0; j < table.dim; ++j)
                out.rows(c, j) += row[j] / static_cast<double>(tokens.size());
        }
        out.notes.push_back("table '" + table.name + "': class '" + cls +
                            "' resolved by averaging " + std::to_string(tokens.size()) +
                            " token vectors");
    }
    return out;
}

namespace {

EncodedCodes embedding_codes_with_states(const std::vector<EmbeddingTable>& tables,
                                         const std::vector<std::string>& state_classes,
                                         const std::vector<std::string>& classes) {
    if (tables.empty()) throw ContractError("embedding_codes: no tables given");
    EncodedCodes out;
    std::vector<Matrix> class_rows; // per table: classes x dim, L2-normalized

    auto normalized_rows = [&](const EmbeddingTable& table, const std::vector<std::string>& names,
                               std::vector<std::string>& notes) {
        ResolvedVectors rv = resolve_class_vectors(table, names);
        for (auto& n : rv.notes) notes.push_back(std::move(n));
        for (std::size_t r = 0; r < rv.rows.rows(); ++r) {
            const double n = norm2(rv.rows.row(r));
            if (n == 0.0)
                throw DataError("embedding table '" + table.name + "': zero vector for class '" +
                                names[r] + "'");
            for (std::size_t j = 0; j < rv.rows.cols(); ++j) rv.rows(r, j) /= n;
        }
        return rv.rows;
    };

    for (const auto& table : tables) {
        SemanticDef def;
        def.name = table.name;
        def.kind = SemanticKind::Embedding;
        def.state_count = state_classes.size();
        def.state_dim = table.dim;
        def.state_names = state_classes;
        def.state_codewords = transpose(normalized_rows(table, state_classes, out.notes));
        out.spec.semantics.push_back(std::move(def));
        class_rows.push_back(normalized_rows(table, classes, out.notes));
    }

    const auto off = out.spec.offsets();
    out.codes.phi = Matrix(out.spec.total_dim(), classes.size());
    out.codes.class_names = classes;
    out.codes.state_table.resize(tables.size());
    for (std::size_t k = 0; k < tables.size(); ++k) {
        out.codes.state_table[k].resize(classes.size());
        for (std::size_t c = 0; c < classes.size(); ++c) {
            int state = -1;
            for (std::size_t s = 0; s < state_classes.size(); ++s)
                if (state_classes[s] == classes[c]) { state = static_cast<int>(s); break; }
            out.codes.state_table[k][c] = state;
            for (std::size_t j = 0; j < tables[k].dim; ++j)
                out.codes.phi(off[k] + j, c) = class_rows[k](c, j);
        }
    }
    validate_code_matrix(out.spec, out.codes);
    return out;
}

} // namespace

EncodedCodes embedding_codes(const std::vector<EmbeddingTable>& tables,
                             const std::vector<std::string>& classes) {
    return embedding_codes_with_states(tables, classes, classes);
}

// ---------------------------------------------------------------------------
// Concatenation and rebuilding
// ---------------------------------------------------------------------------

EncodedCodes concat_codes(const std::vector<EncodedCodes>& parts) {
    if (parts.empty()) throw ContractError("concat_codes: no parts");
    EncodedCodes out;
    out.codes.class_names = parts.front().codes.class_names;
    const std::size_t c_count = out.codes.class_names.size();
    std::size_t q = 0;
    for (const auto& p : parts) {
        if (p.codes.class_names != out.codes.class_names)
            throw ContractError("concat_codes: parts disagree on the class list");
        q += p.spec.total_dim();
    }
    out.codes.phi = Matrix(q, c_count);
    std::size_t row = 0;
    for (const auto& p : parts) {
        for (const auto& s : p.spec.semantics) out.spec.semantics.push_back(s);
        for (const auto& st : p.codes.state_table) out.codes.state_table.push_back(st);
        for (const auto& n : p.notes) out.notes.push_back(n);
        for (std::size_t r = 0; r < p.codes.phi.rows(); ++r, ++row)
            out.codes.phi.set_row(row, p.codes.phi.row(r));
    }
    validate_code_matrix(out.spec, out.codes);
    return out;
}

namespace {

AttributeMatrix select_attribute_rows(const AttributeMatrix& src,
                                      const std::vector<std::string>& classes) {
    AttributeMatrix out;
    out.binary = src.binary;
    out.attribute_names = src.attribute_names;
    out.rescale_bounds = src.rescale_bounds;
    out.class_names = classes;
    out.values = Matrix(classes.size(), src.values.cols());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        auto it = std::find(src.class_names.begin(), src.class_names.end(), classes[c]);
        if (it == src.class_names.end())
            throw ContractError("class '" + classes[c] + "' not covered by the attribute matrix");
        out.values.set_row(c, src.values.row(
                                  static_cast<std::size_t>(it - src.class_names.begin())));
    }
    return out;
}

} // namespace

EncodedCodes build_codes(const SemanticSource& source, const std::vector<std::string>& classes) {
    if (classes.empty()) throw ContractError("build_codes: empty class list");
    std::vector<EncodedCodes> parts;
    if (source.attributes)
        parts.push_back(attribute_codes(select_attribute_rows(*source.attributes, classes)));
    if (source.taxonomy) parts.push_back(taxonomy_codes(*source.taxonomy, classes));
    if (!source.embeddings.empty()) {
        const auto& states = source.embedding_state_classes.empty()
                                 ? classes
                                 : source.embedding_state_classes;
        parts.push_back(embedding_codes_with_states(source.embeddings, states, classes));
    }
    if (parts.empty()) throw ContractError("build_codes: source has no semantic parts");
    if (parts.size() == 1) return parts.front();
    return concat_codes(parts);
}

CodeMatrix codes_for_classes(const SemanticSpec& spec, const SemanticSource& source,
                             const std::vector<std::string>& classes) {
    EncodedCodes rebuilt = build_codes(source, classes);
    if (rebuilt.spec.semantics.size() != spec.semantics.size())
        throw ContractError("codes_for_classes: source does not reproduce the spec layout");
    for (std::size_t k = 0; k < spec.semantics.size(); ++k) {
        const auto& a = spec.semantics[k];
        const auto& b = rebuilt.spec.semantics[k];
        if (a.name != b.name || a.kind != b.kind || a.state_dim != b.state_dim ||
            a.state_count != b.state_count || !(a.state_codewords == b.state_codewords))
            throw ContractError("codes_for_classes: semantic '" + a.name +
                                "' differs from the source construction");
    }
    return rebuilt.codes;
}

} // namespace score
