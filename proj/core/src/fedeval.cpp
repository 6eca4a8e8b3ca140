#include "persona/fedeval.hpp"

#include <atomic>

#include "persona/errors.hpp"

namespace persona {

namespace {

std::uint64_t next_request_id() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}

EvalSummary run_request(const UserNode& node, std::shared_ptr<const std::string> artifact,
                        EvalSplit split, AuditLog* audit) {
    EvaluateRequest request{std::move(artifact), split, next_request_id()};
    if (audit) {
        audit->record({request.request_id, node.user(), AuditEntry::Kind::model_artifact,
                       request.artifact->size()});
    }
    const EvaluateResponse response = node.handle(request);
    if (audit) {
        audit->record({response.request_id, node.user(), AuditEntry::Kind::summary_counts,
                       2 * sizeof(long)});
    }
    return {response.correct, response.total};
}

}  // namespace

std::string eval_split_name(EvalSplit split) {
    switch (split) {
        case EvalSplit::dev: return "dev";
        case EvalSplit::test: return "test";
        case EvalSplit::pure_test: return "pure_test";
    }
    throw std::invalid_argument("unknown split");
}

void AuditLog::record(const AuditEntry& entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(entry);
}

std::vector<AuditEntry> AuditLog::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

UserNode::UserNode(int user, UserShard shard, ModelParams local_model)
    : user_(user), shard_(std::move(shard)), model_(std::move(local_model)) {}

long UserNode::split_size(EvalSplit split) const {
    switch (split) {
        case EvalSplit::dev: return static_cast<long>(shard_.dev.size());
        case EvalSplit::test: return static_cast<long>(shard_.test.size());
        case EvalSplit::pure_test: return static_cast<long>(shard_.pure_test.size());
    }
    throw std::invalid_argument("unknown split");
}

EvaluateResponse UserNode::handle(const EvaluateRequest& request) const {
    if (!request.artifact) throw DataError("evaluate request without artifact");
    const Predictor predictor = predictor_from_bytes(*request.artifact);
    const std::vector<Sentence>* split = nullptr;
    switch (request.split) {
        case EvalSplit::dev: split = &shard_.dev; break;
        case EvalSplit::test: split = &shard_.test; break;
        case EvalSplit::pure_test: split = &shard_.pure_test; break;
    }
    const EvalSummary summary = evaluate(predictor, *split);
    return {summary.correct, summary.total, request.request_id};
}

EvalSummary node_evaluate(const UserNode& node, const Predictor& foreign, EvalSplit split,
                          AuditLog* audit) {
    auto artifact = std::make_shared<const std::string>(predictor_to_bytes(foreign));
    return run_request(node, std::move(artifact), split, audit);
}

EvalSummary node_evaluate(const UserNode& node, const ModelParams& foreign, EvalSplit split,
                          AuditLog* audit) {
    return node_evaluate(node, Predictor::single_model(foreign), split, audit);
}

GlobalEvalReport global_accuracy(const Predictor& predictor, std::span<const UserNode> nodes,
                                 EvalSplit split, AuditLog* audit) {
    if (nodes.empty()) throw DataError("global_accuracy: empty node list");
    // Serialize once; every node receives the same artifact bytes.
    auto artifact = std::make_shared<const std::string>(predictor_to_bytes(predictor));
    GlobalEvalReport report;
    for (const auto& node : nodes) {
        const EvalSummary summary = run_request(node, artifact, split, audit);
        report.per_node.push_back(summary);
        report.aggregate += summary;
    }
    return report;
}

GlobalEvalReport global_accuracy(const ModelParams& model, std::span<const UserNode> nodes,
                                 EvalSplit split, AuditLog* audit) {
    return global_accuracy(Predictor::single_model(model), nodes, split, audit);
}

}  // namespace persona
