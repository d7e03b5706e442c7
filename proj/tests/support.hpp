#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include "navnet/graph.hpp"
#include "navnet/labels.hpp"
#include "navnet/util.hpp"

namespace navnet::testing {

// Small hand-checkable graph: A and B are misinformation, S is a google host
// and F a facebook host. C is an unlabeled neighbour of A.
inline NavigationGraph g1(Month month = {2022, 10}) {
    return NavigationGraph::from_parts(month, {},
                                       {{"a.example", "b.example", 5000},
                                        {"b.example", "a.example", 4000},
                                        {"google.com", "a.example", 6000},
                                        {"facebook.com", "a.example", 3500},
                                        {"a.example", "c.example", 3000}});
}

inline LabelStore g1_store() {
    LabelStore s;
    s.merge({"a.example", DomainClass::misinformation, false, "test", ""});
    s.merge({"b.example", DomainClass::misinformation, false, "test", ""});
    return s;
}

/// Random directed graph with unique edges and weights in [1, max_weight].
inline NavigationGraph random_graph(Rng& rng, std::size_t nodes, double density, std::int64_t max_weight = 20000) {
    std::vector<Domain> names;
    for (std::size_t i = 0; i < nodes; ++i) names.push_back("n" + std::to_string(i) + ".example");
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < nodes; ++i)
        for (std::size_t j = 0; j < nodes; ++j)
            if (i != j && rng.bernoulli(density))
                edges.push_back({names[i], names[j], 1 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(max_weight)))});
    return NavigationGraph::from_parts({2022, 10}, names, edges);
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("navnet_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

}  // namespace navnet::testing
