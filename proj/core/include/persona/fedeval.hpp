#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "persona/ensemble.hpp"
#include "persona/neural.hpp"
#include "persona/partition.hpp"

namespace persona {

enum class EvalSplit { dev, test, pure_test };
std::string eval_split_name(EvalSplit split);

/// Wire schema of the in-process node boundary. The artifact is a serialized
/// Predictor (single model or ensemble); a transport could carry these bytes
/// unchanged. Artifact bytes are shared, never mutated.
struct EvaluateRequest {
    std::shared_ptr<const std::string> artifact;
    EvalSplit split = EvalSplit::test;
    std::uint64_t request_id = 0;
};

struct EvaluateResponse {
    long correct = 0;
    long total = 0;
    std::uint64_t request_id = 0;
};

/// Record of everything that crossed a node boundary. Payloads are model
/// artifacts and (correct, total) pairs only; sentences never appear.
struct AuditEntry {
    enum class Kind { model_artifact, summary_counts };
    std::uint64_t request_id = 0;
    int node = 0;
    Kind kind = Kind::model_artifact;
    std::size_t payload_bytes = 0;
};

class AuditLog {
public:
    void record(const AuditEntry& entry);
    std::vector<AuditEntry> entries() const;

private:
    mutable std::mutex mutex_;
    std::vector<AuditEntry> entries_;
};

/// A simulated user device: private shard plus the locally trained model.
/// The only exports are its own model weights and summary counts; no
/// operation returns Sentence data.
class UserNode {
public:
    UserNode(int user, UserShard shard, ModelParams local_model);

    int user() const { return user_; }
    const ModelParams& local_model() const { return model_; }
    long split_size(EvalSplit split) const;

    /// Deserializes the artifact, evaluates it on the requested private
    /// split, returns counts. Node state is unchanged.
    EvaluateResponse handle(const EvaluateRequest& request) const;

private:
    int user_;
    UserShard shard_;
    ModelParams model_;
};

/// Evaluate a foreign predictor on one node's private split through the
/// message boundary. The node never sees the caller; the caller never sees
/// sentences.
EvalSummary node_evaluate(const UserNode& node, const Predictor& foreign, EvalSplit split,
                          AuditLog* audit = nullptr);
EvalSummary node_evaluate(const UserNode& node, const ModelParams& foreign, EvalSplit split,
                          AuditLog* audit = nullptr);

struct GlobalEvalReport {
    std::vector<EvalSummary> per_node;
    EvalSummary aggregate;  // micro-average: sum of correct over sum of total

    double aggregate_accuracy() const { return aggregate.accuracy(); }
};

/// Global performance of a predictor: one evaluation request per node, counts
/// summed. Equals centralized evaluation whenever the node shards partition
/// the data. Throws on an empty node list.
GlobalEvalReport global_accuracy(const Predictor& predictor, std::span<const UserNode> nodes,
                                 EvalSplit split = EvalSplit::test, AuditLog* audit = nullptr);
GlobalEvalReport global_accuracy(const ModelParams& model, std::span<const UserNode> nodes,
                                 EvalSplit split = EvalSplit::test, AuditLog* audit = nullptr);

}  // namespace persona
