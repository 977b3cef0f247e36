#include <doctest.h>

#include <cmath>

#include "score/semantics.hpp"
#include "test_util.hpp"

using namespace score;
using namespace score::test;

namespace {

/// Six-animal tree with four internal decisions, used across the suite.
Taxonomy animal_tree() {
    Taxonomy t;
    t.nodes = {
        {"animal", {1, 4, 7}, ""},   // 0
        {"aquatic", {2, 3}, ""},     // 1
        {"dolphin", {}, "dolphin"},  // 2
        {"whale", {}, "whale"},      // 3
        {"terrestrial", {5, 6}, ""}, // 4
        {"bear", {}, "bear"},        // 5
        {"cat", {}, "cat"},          // 6
        {"aerial", {8, 9}, ""},      // 7
        {"eagle", {}, "eagle"},      // 8
        {"owl", {}, "owl"},          // 9
    };
    t.root = 0;
    return t;
}

const std::vector<std::string> kAnimals{"dolphin", "whale", "bear", "cat", "eagle", "owl"};

} // namespace

TEST_SUITE_BEGIN("semantics");

TEST_CASE("simplex: smallest cases have exact coordinates") {
    const Matrix two = max_separated_codewords(2);
    CHECK(two.rows() == 1);
    CHECK(two(0, 0) == 1.0);
    CHECK(two(0, 1) == -1.0);

    const Matrix three = max_separated_codewords(3);
    CHECK(three.rows() == 2);
    CHECK(near(three(0, 0), 1.0, 1e-15));
    CHECK(near(three(1, 0), 0.0, 1e-15));
    CHECK(near(three(0, 1), -0.5, 1e-15));
    CHECK(near(three(1, 1), std::sqrt(3.0) / 2.0, 1e-15));
    CHECK(near(three(0, 2), -0.5, 1e-15));
    CHECK(near(three(1, 2), -std::sqrt(3.0) / 2.0, 1e-15));
}

TEST_CASE("simplex: Gram matrix oracle for S=6") {
    const Matrix v = max_separated_codewords(6);
    const Matrix gram = naive_matmul(transpose(v), v);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            CHECK(near(gram(i, j), i == j ? 1.0 : -0.2, 1e-12));
}

TEST_CASE("simplex: defining properties for S in [2,12]") {
    for (std::size_t s = 2; s <= 12; ++s) {
        const Matrix v = max_separated_codewords(s);
        CHECK(v.rows() == s - 1);
        CHECK(v.cols() == s);
        const double target = -1.0 / static_cast<double>(s - 1);
        for (std::size_t i = 0; i < s; ++i) {
            CHECK(near(norm2(v.col(i)), 1.0, 1e-12));
            for (std::size_t j = i + 1; j < s; ++j)
                CHECK(near(dot(v.col(i), v.col(j)), target, 1e-12));
        }
        for (std::size_t r = 0; r < s - 1; ++r) {
            double sum = 0.0;
            for (std::size_t i = 0; i < s; ++i) sum += v(r, i);
            CHECK(near(sum, 0.0, 1e-12));
        }
    }
    CHECK_THROWS_AS(max_separated_codewords(1), ContractError);
}

TEST_CASE("attribute codes transcribe rows into columns") {
    AttributeMatrix src;
    src.binary = true;
    src.values = Matrix::from_rows({{1, 1, -1}, {-1, 1, 1}});
    src.class_names = {"a", "b"};
    src.attribute_names = {"furry", "legs", "wings"};
    const auto enc = attribute_codes(src);
    CHECK(enc.spec.semantics.size() == 3);
    CHECK(enc.spec.total_dim() == 3);
    CHECK(enc.codes.phi.col(0) == std::vector<double>{1, 1, -1});
    CHECK(enc.codes.phi.col(1) == std::vector<double>{-1, 1, 1});
    // present = state 0, absent = state 1
    CHECK(enc.codes.state_table[0] == std::vector<int>{0, 1});
    CHECK(enc.codes.state_table[2] == std::vector<int>{1, 0});
}

TEST_CASE("attribute codes at dataset scale: 40 classes, 85 attributes") {
    RngStream rng(23);
    AttributeMatrix src;
    src.binary = true;
    for (std::size_t c = 0; c < 40; ++c) src.class_names.push_back("cls" + std::to_string(c));
    src.values = random_sign(40, 85, rng);
    src.values(0, 0) = 1.0; // nudge to be safe against duplicate rows
    const auto enc = attribute_codes(src);
    CHECK(enc.codes.phi.rows() == 85);
    CHECK(enc.codes.phi.cols() == 40);
}

TEST_CASE("attribute codes reject out-of-range entries") {
    AttributeMatrix src;
    src.binary = false;
    src.values = Matrix::from_rows({{0.2, 1.2}, {-0.5, 0.0}});
    src.class_names = {"a", "b"};
    src.attribute_names = {"p", "q"};
    CHECK_THROWS_WITH_AS(attribute_codes(src), doctest::Contains("out of [-1,1]"), ContractError);

    AttributeMatrix bad = src;
    bad.binary = true;
    bad.values = Matrix::from_rows({{1, 0.5}, {-1, 1}});
    CHECK_THROWS_AS(attribute_codes(bad), ContractError);
}

TEST_CASE("taxonomy codes: the six-animal tree") {
    const auto enc = taxonomy_codes(animal_tree(), kAnimals);
    REQUIRE(enc.spec.semantics.size() == 4); // one semantic per internal node
    CHECK(enc.spec.semantics[0].name == "animal");
    CHECK(enc.spec.semantics[1].name == "aquatic");
    CHECK(enc.spec.semantics[2].name == "terrestrial");
    CHECK(enc.spec.semantics[3].name == "aerial");
    // root has 3 children + reject, others 2 + reject
    CHECK(enc.spec.semantics[0].state_count == 4);
    CHECK(enc.spec.semantics[1].state_count == 3);
    CHECK(enc.spec.total_dim() == 3 + 2 + 2 + 2);

    // bear: branch 'terrestrial' at the root, reject at aquatic/aerial,
    // branch 'bear' at terrestrial
    const int bear = enc.codes.class_index("bear");
    REQUIRE(bear >= 0);
    CHECK(enc.codes.state_table[0][static_cast<std::size_t>(bear)] == 1); // 2nd child
    CHECK(enc.codes.state_table[1][static_cast<std::size_t>(bear)] == 2); // reject
    CHECK(enc.codes.state_table[2][static_cast<std::size_t>(bear)] == 0); // bear branch
    CHECK(enc.codes.state_table[3][static_cast<std::size_t>(bear)] == 2); // reject

    const auto off = enc.spec.offsets();
    const auto phi_bear = enc.codes.phi.col(static_cast<std::size_t>(bear));
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& sem = enc.spec.semantics[k];
        const int s = enc.codes.state_table[k][static_cast<std::size_t>(bear)];
        for (std::size_t j = 0; j < sem.state_dim; ++j)
            CHECK(phi_bear[off[k] + j] == sem.state_codewords(j, static_cast<std::size_t>(s)));
    }
}

TEST_CASE("taxonomy codes: single root with two leaves") {
    Taxonomy t;
    t.nodes = {{"root", {1, 2}, ""}, {"a", {}, "a"}, {"b", {}, "b"}};
    t.root = 0;
    const auto enc = taxonomy_codes(t, {"a", "b"});
    REQUIRE(enc.spec.semantics.size() == 1);
    CHECK(enc.spec.semantics[0].state_count == 3); // 2 children + reject
    const Matrix simplex = max_separated_codewords(3);
    for (std::size_t j = 0; j < 2; ++j) CHECK(enc.codes.phi(j, 0) == simplex(j, 0));
}

TEST_CASE("taxonomy normalization collapses dummy chains") {
    Taxonomy chain;
    chain.nodes = {{"root", {1}, ""}, {"a", {2}, ""}, {"b", {3, 4}, ""},
                   {"x", {}, "x"},   {"y", {}, "y"}};
    chain.root = 0;
    const Taxonomy norm = normalize_taxonomy(chain);
    CHECK(norm.internal_preorder().size() == 1);
    CHECK(norm.nodes[static_cast<std::size_t>(norm.root)].name == "b");

    Taxonomy dead;
    dead.nodes = {{"root", {1}, ""}, {"a", {2}, ""}, {"leaf", {}, "x"}};
    dead.root = 0;
    CHECK_THROWS_WITH_AS(normalize_taxonomy(dead), doctest::Contains("no internal decisions"),
                         DataError);
}

TEST_CASE("taxonomy codes reject unreachable classes") {
    CHECK_THROWS_WITH_AS(taxonomy_codes(animal_tree(), {"bear", "unicorn"}),
                         doctest::Contains("unicorn"), ContractError);
}

TEST_CASE("embedding codes normalize class vectors") {
    EmbeddingTable t;
    t.name = "w2v";
    t.dim = 2;
    t.words = {"a", "b"};
    t.index = {{"a", 0}, {"b", 1}};
    t.vectors = Matrix::from_rows({{3, 4}, {0, 2}});
    const auto enc = embedding_codes({t}, {"a", "b"});
    CHECK(near(enc.codes.phi(0, 0), 0.6, 1e-15));
    CHECK(near(enc.codes.phi(1, 0), 0.8, 1e-15));
    CHECK(near(enc.codes.phi(0, 1), 0.0, 1e-15));
    CHECK(near(enc.codes.phi(1, 1), 1.0, 1e-15));
    CHECK(enc.codes.state_table[0] == std::vector<int>{0, 1});

    EmbeddingTable missing = t;
    missing.words = {"a"};
    missing.index = {{"a", 0}};
    missing.vectors = Matrix::from_rows({{3, 4}});
    CHECK_THROWS_WITH_AS(embedding_codes({missing}, {"a", "whale"}),
                         doctest::Contains("whale"), DataError);
}

TEST_CASE("nine embedding tables concatenate to the full width") {
    RngStream rng(31);
    std::vector<EmbeddingTable> tables;
    const std::vector<std::string> classes{"a", "b", "c"};
    int id = 0;
    for (const int window : {3, 5, 10})
        for (const std::size_t dim : {50u, 100u, 500u}) {
            EmbeddingTable t;
            t.name = "w" + std::to_string(window) + "_d" + std::to_string(dim) + "_" +
                     std::to_string(id++);
            t.dim = dim;
            t.words = classes;
            for (std::size_t i = 0; i < classes.size(); ++i) t.index[classes[i]] = i;
            t.vectors = random_normal(classes.size(), dim, 0.0, 1.0, rng);
            tables.push_back(std::move(t));
        }
    const auto enc = embedding_codes(tables, classes);
    CHECK(enc.spec.total_dim() == 3 * (50 + 100 + 500));
}

TEST_CASE("multi-word class names fall back to token averages") {
    EmbeddingTable t;
    t.name = "w2v";
    t.dim = 2;
    t.words = {"killer", "whale"};
    t.index = {{"killer", 0}, {"whale", 1}};
    t.vectors = Matrix::from_rows({{1, 0}, {0, 3}});
    const auto rv = resolve_class_vectors(t, {"killer whale"});
    CHECK(rv.rows(0, 0) == 0.5);
    CHECK(rv.rows(0, 1) == 1.5);
    REQUIRE(rv.notes.size() == 1);
    CHECK(rv.notes[0].find("averaging") != std::string::npos);
}

TEST_CASE("code matrix invariant: rebuilding phi from states is exact") {
    SemanticSource source;
    source.taxonomy = animal_tree();
    AttributeMatrix attrs;
    attrs.binary = true;
    RngStream rng(37);
    attrs.values = random_sign(6, 5, rng);
    attrs.class_names = kAnimals;
    source.attributes = attrs;
    const auto enc = build_codes(source, kAnimals);

    const auto off = enc.spec.offsets();
    Matrix rebuilt(enc.codes.phi.rows(), enc.codes.phi.cols());
    for (std::size_t k = 0; k < enc.spec.semantics.size(); ++k) {
        const auto& sem = enc.spec.semantics[k];
        for (std::size_t c = 0; c < enc.codes.class_count(); ++c) {
            const int s = enc.codes.state_table[k][c];
            for (std::size_t j = 0; j < sem.state_dim; ++j)
                rebuilt(off[k] + j, c) = sem.state_codewords(j, static_cast<std::size_t>(s));
        }
    }
    CHECK(rebuilt == enc.codes.phi);
}

TEST_CASE("codes_for_classes: idempotence and column permutation") {
    AttributeMatrix src;
    src.binary = true;
    RngStream rng(41);
    src.values = random_sign(5, 8, rng);
    src.class_names = {"a", "b", "c", "d", "e"};
    SemanticSource source;
    source.attributes = src;

    const auto enc = build_codes(source, src.class_names);
    const CodeMatrix again = codes_for_classes(enc.spec, source, src.class_names);
    CHECK(again.phi == enc.codes.phi);

    const std::vector<std::string> permuted{"d", "a", "e", "c", "b"};
    const CodeMatrix perm = codes_for_classes(enc.spec, source, permuted);
    for (std::size_t c = 0; c < permuted.size(); ++c) {
        const int orig = enc.codes.class_index(permuted[c]);
        CHECK(perm.phi.col(c) == enc.codes.phi.col(static_cast<std::size_t>(orig)));
    }
}

TEST_CASE("codes_for_classes: taxonomy ZS columns have one non-reject path") {
    SemanticSource source;
    source.taxonomy = animal_tree();
    const std::vector<std::string> train{"dolphin", "bear", "eagle"};
    const std::vector<std::string> zs{"whale", "cat", "owl"};
    const auto enc = build_codes(source, train);
    const CodeMatrix zs_codes = codes_for_classes(enc.spec, source, zs);

    const Taxonomy& tree = *source.taxonomy;
    const auto internal = tree.internal_preorder();
    for (std::size_t c = 0; c < zs.size(); ++c) {
        // the non-reject states must be exactly the ancestors of the class leaf
        const int leaf = tree.leaf_of_class(zs[c]);
        REQUIRE(leaf >= 0);
        for (std::size_t k = 0; k < internal.size(); ++k) {
            const auto& sem = enc.spec.semantics[k];
            const bool non_reject = zs_codes.state_table[k][c] !=
                                    static_cast<int>(sem.state_count - 1);
            // ancestor test by walking down from the internal node
            std::vector<int> stack{internal[k]};
            bool is_ancestor = false;
            while (!stack.empty()) {
                const int n = stack.back();
                stack.pop_back();
                if (n == leaf) { is_ancestor = true; break; }
                for (int ch : tree.nodes[static_cast<std::size_t>(n)].children)
                    stack.push_back(ch);
            }
            CHECK(non_reject == is_ancestor);
        }
    }
}

TEST_CASE("embedding ZS classes fall back to their own vectors") {
    EmbeddingTable t;
    t.name = "w2v";
    t.dim = 3;
    t.words = {"a", "b", "z"};
    t.index = {{"a", 0}, {"b", 1}, {"z", 2}};
    t.vectors = Matrix::from_rows({{1, 0, 0}, {0, 2, 0}, {0, 0, 4}});
    SemanticSource source;
    source.embeddings = {t};
    source.embedding_state_classes = {"a", "b"};

    const auto enc = build_codes(source, {"a", "b"});
    const CodeMatrix zs = codes_for_classes(enc.spec, source, {"z"});
    CHECK(zs.state_table[0][0] == -1);
    CHECK(zs.phi(2, 0) == 1.0); // normalized own vector
}

TEST_CASE("duplicate class codes are rejected") {
    AttributeMatrix src;
    src.binary = true;
    src.values = Matrix::from_rows({{1, -1}, {1, -1}});
    src.class_names = {"a", "b"};
    CHECK_THROWS_WITH_AS(attribute_codes(src), doctest::Contains("identical code"), ContractError);
}

TEST_CASE("concatenating sources stacks their dimensions") {
    AttributeMatrix attrs;
    attrs.binary = true;
    RngStream rng(43);
    attrs.values = random_sign(6, 4, rng);
    attrs.class_names = kAnimals;
    SemanticSource source;
    source.attributes = attrs;
    source.taxonomy = animal_tree();
    const auto enc = build_codes(source, kAnimals);
    CHECK(enc.spec.total_dim() == 4 + 9); // attributes + taxonomy children sum
    CHECK(enc.spec.semantics.size() == 4 + 4);
}

TEST_SUITE_END();
