#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "score/matrix.hpp"

namespace score {

enum class SemanticKind { BinaryAttribute, ContinuousAttribute, TaxonomyNode, Embedding };

std::string to_string(SemanticKind k);
SemanticKind semantic_kind_from_string(const std::string& s);

/// One semantic concept: its discrete states and their codewords psi_i.
struct SemanticDef {
    std::string name;
    SemanticKind kind = SemanticKind::BinaryAttribute;
    std::size_t state_count = 0; ///< S_k (0 for continuous attributes)
    std::size_t state_dim = 1;   ///< d_k
    Matrix state_codewords;      ///< state_dim x state_count, column i = psi_i; empty for continuous
    std::vector<std::string> state_names;

    bool discrete() const { return kind != SemanticKind::ContinuousAttribute; }
};

/// The ordered semantic vocabulary; lays out the concatenated code space.
struct SemanticSpec {
    std::vector<SemanticDef> semantics;

    std::size_t total_dim() const;
    /// Start offset of each semantic's slice in f / phi (size = semantics.size() + 1,
    /// last entry = total_dim()).
    std::vector<std::size_t> offsets() const;
    void validate() const;
};

/// Assembled class codes: column c of phi is phi(c); state_table[k][c] is
/// s_k^c for discrete semantics (empty inner vector for continuous ones,
/// -1 where a class has no state among the semantic's states).
struct CodeMatrix {
    Matrix phi; ///< total_dim x C
    std::vector<std::vector<int>> state_table;
    std::vector<std::string> class_names;

    std::size_t class_count() const { return phi.cols(); }
    int class_index(const std::string& name) const; // -1 when absent
};

/// Checks the CodeMatrix invariants against its spec: discrete slices equal
/// their state codewords exactly, continuous entries lie in [-1,1], and
/// columns are pairwise distinct.
void validate_code_matrix(const SemanticSpec& spec, const CodeMatrix& codes);

// ---------------------------------------------------------------------------
// Semantic sources
// ---------------------------------------------------------------------------

/// Class-by-attribute value grid, already validated/remapped to [-1,1]
/// (exactly {-1,+1} when binary).
struct AttributeMatrix {
    Matrix values; ///< C x Q
    bool binary = true;
    std::vector<std::string> class_names;
    std::vector<std::string> attribute_names;
    /// Per-attribute (min,max) recorded when continuous values were rescaled.
    std::vector<std::pair<double, double>> rescale_bounds;
    std::vector<std::string> notes; ///< degenerate-column warnings etc.
};

/// A rooted tree of named nodes. After normalization every internal node has
/// at least two children and every leaf is bound to exactly one class.
struct Taxonomy {
    struct Node {
        std::string name;
        std::vector<int> children; ///< indices into nodes; empty = leaf
        std::string class_name;    ///< bound class (leaves only)
    };
    std::vector<Node> nodes;
    int root = -1;

    bool is_leaf(int i) const { return nodes[i].children.empty(); }
    /// Internal node indices in pre-order.
    std::vector<int> internal_preorder() const;
    int leaf_of_class(const std::string& cls) const; // -1 when absent
};

/// Collapses single-child chains and expands leaves shared by several
/// classes into one leaf per class. Errors if no internal decision remains.
Taxonomy normalize_taxonomy(Taxonomy raw);

/// Raw word-embedding table as read from file.
struct EmbeddingTable {
    std::string name;
    std::size_t dim = 0;
    std::vector<std::string> words; ///< file order
    std::unordered_map<std::string, std::size_t> index;
    Matrix vectors; ///< words x dim
};

/// Per-class rows resolved from an embedding table. Multi-word class names
/// fall back to an underscore-joined lookup, then to the mean of the token
/// vectors; fallbacks are recorded in notes.
struct ResolvedVectors {
    Matrix rows; ///< classes x dim
    std::vector<std::string> notes;
};
ResolvedVectors resolve_class_vectors(const EmbeddingTable& table,
                                      const std::vector<std::string>& classes);

/// Everything needed to rebuild codes for an arbitrary class list. Parts are
/// concatenated in fixed order: attributes, taxonomy, embeddings.
struct SemanticSource {
    std::optional<AttributeMatrix> attributes;
    std::optional<Taxonomy> taxonomy;
    std::vector<EmbeddingTable> embeddings;
    /// Classes whose vectors define the embedding state codewords.
    std::vector<std::string> embedding_state_classes;
};

struct EncodedCodes {
    SemanticSpec spec;
    CodeMatrix codes;
    std::vector<std::string> notes;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// The S vertices of a regular simplex in R^{S-1}: unit norm, pairwise inner
/// products -1/(S-1), zero sum. Deterministic orientation with the first
/// vertex on the first axis. Returned as an (S-1) x S matrix, column i =
/// vertex i.
Matrix max_separated_codewords(std::size_t s);

EncodedCodes attribute_codes(const AttributeMatrix& source);
EncodedCodes taxonomy_codes(const Taxonomy& tree, const std::vector<std::string>& classes);
EncodedCodes embedding_codes(const std::vector<EmbeddingTable>& tables,
                             const std::vector<std::string>& classes);

/// Concatenates per-source codes over a shared class list (attribute
/// concatenation applied across sources).
EncodedCodes concat_codes(const std::vector<EncodedCodes>& parts);

/// Builds codes for `classes` from every part present in the source.
EncodedCodes build_codes(const SemanticSource& source, const std::vector<std::string>& classes);

/// Rebuilds a CodeMatrix for a new class list by the identical construction;
/// the spec argument is checked for consistency with the source.
CodeMatrix codes_for_classes(const SemanticSpec& spec, const SemanticSource& source,
                             const std::vector<std::string>& classes);

} // namespace score
