#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "score/matrix.hpp"
#include "score/semantics.hpp"

namespace score {

/// N feature vectors with class labels; optional per-sample binary attribute
/// labels (one {0,1} column per binary-attribute semantic).
struct FeatureSet {
    Matrix features; ///< N x d
    std::vector<int> labels;
    std::vector<std::string> sample_ids;
    std::vector<std::string> class_names;
    Matrix sample_attributes; ///< N x Q_attr in {0,1}; empty when absent

    std::size_t size() const { return features.rows(); }
    void validate() const;
};

struct SplitSpec {
    std::vector<std::string> train_classes;
    std::vector<std::string> zs_classes;
    std::vector<std::string> validation_classes;

    void validate() const; ///< pairwise disjoint
};

struct SyntheticConfig {
    std::size_t q = 16;         ///< attribute count
    std::size_t c_train = 12;
    std::size_t c_zs = 4;
    std::size_t d = 64;         ///< feature dimension
    std::size_t n_per_class = 150;
    double noise_sigma = 0.25;
    double misalignment = 0.0;  ///< probability a ZS code is pushed out of the train span
    std::uint64_t seed = 1;

    void validate() const;
};

struct SyntheticTask {
    FeatureSet train;
    FeatureSet zs;
    AttributeMatrix attributes; ///< rows cover train then ZS classes
    SplitSpec split;
};

// ---------------------------------------------------------------------------
// Text formats (all loaders fail with line-numbered errors)
// ---------------------------------------------------------------------------

/// One class name per line; '#' comments and blank lines ignored.
std::vector<std::string> load_class_list(const std::string& path);
void save_class_list(const std::string& path, const std::vector<std::string>& classes);

/// CSV `id,label,f0..f{d-1}`; labels are class-name strings resolved against
/// the given class list. Doubles are written shortest-round-trip, so
/// save -> load is bit-exact.
FeatureSet load_features(const std::string& path, const std::vector<std::string>& class_names);
void save_features(const std::string& path, const FeatureSet& fs);

/// CSV grid with an attribute-name header and class-name row keys. Binary
/// grids hold {0,1} (mapped to -/+1) or already-mapped {-1,+1}; continuous
/// grids are min-max rescaled per attribute to [-1,1] (recorded in
/// rescale_bounds; a constant column maps to all zeros).
AttributeMatrix load_attribute_matrix(const std::string& path, bool binary);
void save_attribute_matrix(const std::string& path, const AttributeMatrix& am);

/// Indented-text tree: one node per line, depth = leading tab count, leaves
/// annotated `= classname` (several comma-separated classes expand into one
/// leaf each). Single-child chains are collapsed on load.
Taxonomy load_taxonomy(const std::string& path);

/// `word v1 v2 ... vk` per line; an optional `count dim` header line is
/// skipped. The table name defaults to the file stem.
EmbeddingTable load_embedding_file(const std::string& path);

/// Loads a table and resolves vectors for the requested classes (exact name,
/// underscore-joined, then token-average fallback).
ResolvedVectors load_embeddings(const std::string& path, const std::vector<std::string>& classes);

/// Split file: `[train]` / `[zs]` / `[validation]` sections of class names.
SplitSpec load_split(const std::string& path);
void save_split(const std::string& path, const SplitSpec& split);

/// Sidecar CSV `id,a0..a{Q-1}` with {0,1} entries, matched to sample ids.
Matrix load_sample_attributes(const std::string& path, const std::vector<std::string>& ids);
void save_sample_attributes(const std::string& path, const std::vector<std::string>& ids,
                            const Matrix& attrs);

/// Code matrix CSV (rows = code dimensions, columns = classes) plus a JSON
/// sidecar `<base>.meta.json` holding the semantic spec and state table.
void save_code_matrix(const std::string& base, const SemanticSpec& spec, const CodeMatrix& codes);
std::pair<SemanticSpec, CodeMatrix> load_code_matrix(const std::string& base);

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

/// Desk-scale zero-shot task: distinct sign codes per class, a Gaussian
/// mixing matrix A (d x Q, entries N(0,1)/sqrt(Q)), features A phi(y) plus
/// isotropic noise, and per-sample attribute labels equal to the class code.
/// With misalignment m, each ZS code is (with probability m) resampled until
/// its unit code is at orthogonal distance >= 0.5 from the span of training
/// codes (skipped when the train codes already span the whole space).
SyntheticTask generate_synthetic(const SyntheticConfig& config);

// CSV cell helpers shared by the writers (shortest round-trip formatting).
std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context, std::size_t line_no);

} // namespace score
