#pragma once

#include <cmath>
#include <cstdint>

#include "cascademl/dataset.hpp"
#include "cascademl/rng.hpp"

namespace cascademl::testing {

// Labels are linear threshold functions of the features; every label gets at
// least one positive and one negative row.
inline MultiLabelDataset toy_dataset(std::size_t n, std::size_t d, std::size_t q, std::uint64_t seed,
                                     double noise = 0.0) {
    Rng rng(seed);
    MultiLabelDataset ds;
    ds.x = rand_matrix(rng, n, d, -1.0, 1.0);
    const Matrix w = rand_matrix(rng, q, d, -1.0, 1.0);
    ds.y = Matrix(n, q);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < q; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += w(k, j) * ds.x(i, j);
            if (noise > 0) s += rng.uniform(-noise, noise);
            ds.y(i, k) = s > 0 ? 1.0 : 0.0;
        }
    for (std::size_t k = 0; k < q && n >= 2; ++k) {
        ds.y(0, k) = 1.0;
        ds.y(1, k) = 0.0;
    }
    for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t k = 0; k < q; ++k) ds.label_names.push_back("l" + std::to_string(k));
    return ds;
}

// Labels depend on products of features, so a perceptron cannot fit them.
inline MultiLabelDataset xor_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    MultiLabelDataset ds;
    ds.x = rand_matrix(rng, n, 4, -1.0, 1.0);
    ds.y = Matrix(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = ds.x(i, 0), b = ds.x(i, 1), c = ds.x(i, 2), e = ds.x(i, 3);
        ds.y(i, 0) = a * b > 0 ? 1.0 : 0.0;
        ds.y(i, 1) = c * e > 0 ? 1.0 : 0.0;
        ds.y(i, 2) = a + e > 0 ? 1.0 : 0.0;
    }
    ds.feature_names = {"a", "b", "c", "e"};
    ds.label_names = {"ab", "ce", "sum"};
    return ds;
}

}  // namespace cascademl::testing
