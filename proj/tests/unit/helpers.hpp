#pragma once

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dana/errors.hpp"
#include "dana/htp.hpp"
#include "dana/lm.hpp"

namespace dana::testing {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("dana-test-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

    std::filesystem::path write_file(const std::string& name, const std::string& content) const {
        auto file = path_ / name;
        if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        out << content;
        return file;
    }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Replays canned responses in order; throws when exhausted.
class SequenceBackend : public LmBackend {
public:
    explicit SequenceBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}

    LmResponse complete(const LmRequest& request) override {
        validate_request(request);
        ++calls_;
        if (next_ >= replies_.size()) {
            throw Error("sequence backend exhausted after " + std::to_string(calls_) + " calls");
        }
        return LmResponse{replies_[next_++], FinishReason::complete, id()};
    }
    std::string id() const override { return "sequence"; }
    int calls() const { return calls_; }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    int calls_ = 0;
};

// Fails the whole test if the backend is ever consulted.
class TrapBackend : public LmBackend {
public:
    LmResponse complete(const LmRequest&) override {
        ++calls_;
        throw Error("trap backend was called");
    }
    std::string id() const override { return "trap"; }
    int calls() const { return calls_; }

private:
    int calls_ = 0;
};

// Raises TransportError for the first `failures` calls, then succeeds.
class FlakyBackend : public LmBackend {
public:
    FlakyBackend(int failures, std::string reply) : failures_(failures), reply_(std::move(reply)) {}

    LmResponse complete(const LmRequest& request) override {
        validate_request(request);
        ++calls_;
        if (calls_ <= failures_) throw TransportError("injected transport failure");
        return LmResponse{reply_, FinishReason::complete, id()};
    }
    std::string id() const override { return "flaky"; }
    int calls() const { return calls_; }

private:
    int failures_;
    std::string reply_;
    int calls_ = 0;
};

inline SleepFn no_sleep() {
    return [](std::chrono::milliseconds) {};
}

// Random valid plan: unique ids, non-empty descriptions with awkward
// characters, bounded depth and node count.
inline Htp random_plan(std::mt19937& rng, int max_depth, int max_nodes) {
    static const char* kWords[] = {"etch", "rate",   "gas",    "flow",  "margin", "revenue",
                                   "cost", "filing", "stable", "power", "plasma", "review"};
    static const char* kSpice[] = {"", " \"quoted\"", " back\\slash", " µm", " line\nbreak",
                                   " tab\tstop"};
    std::uniform_int_distribution<int> word(0, 11);
    std::uniform_int_distribution<int> spice(0, 5);

    int budget = std::uniform_int_distribution<int>(1, max_nodes)(rng);
    int next_id = 0;

    struct Builder {
        std::mt19937& rng;
        int max_depth;
        int& budget;
        int& next_id;
        std::uniform_int_distribution<int>& word;
        std::uniform_int_distribution<int>& spice;

        TaskNode build(int depth) {
            TaskNode node;
            node.id = "n" + std::to_string(next_id++);
            node.description = std::string(kWords[word(rng)]) + " " + kWords[word(rng)] +
                               kSpice[spice(rng)];
            if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
                node.resource_refs.push_back(std::string("doc-") + kWords[word(rng)]);
            }
            if (depth < max_depth && budget > 0) {
                int children = std::uniform_int_distribution<int>(0, 3)(rng);
                for (int i = 0; i < children && budget > 0; ++i) {
                    --budget;
                    node.sub_tasks.push_back(build(depth + 1));
                }
            }
            return node;
        }
    };

    Builder builder{rng, max_depth, budget, next_id, word, spice};
    --budget;
    Htp plan;
    plan.root = builder.build(1);
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
        plan.name = std::string("plan-") + kWords[word(rng)];
    }
    return plan;
}

// Second post-order implementation, iterative on purpose: the library walks
// recursively, this one uses an explicit stack.
inline std::vector<const TaskNode*> reference_post_order(const Htp& plan) {
    std::vector<const TaskNode*> out;
    struct Frame {
        const TaskNode* node;
        std::size_t next_child;
    };
    std::vector<Frame> stack;
    stack.push_back({&plan.root, 0});
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next_child < top.node->sub_tasks.size()) {
            const TaskNode* child = &top.node->sub_tasks[top.next_child++];
            stack.push_back({child, 0});
        } else {
            out.push_back(top.node);
            stack.pop_back();
        }
    }
    return out;
}

}  // namespace dana::testing
