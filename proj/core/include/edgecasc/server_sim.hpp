#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "edgecasc/core_model.hpp"
#include "edgecasc/sim_engine.hpp"
#include "edgecasc/traces.hpp"

namespace edgecasc {

/// Largest allowed batch not above min(queue_len, model.max_batch); nullopt on an empty queue.
std::optional<std::uint32_t> select_batch(std::size_t queue_len, const ServerModelProfile& model);

struct Request {
    std::uint32_t device = 0;
    std::uint64_t sample_id = 0;
    double enqueue_ms = 0.0;
    /// heavy_correct is indexed by catalog position.
    const TraceRecord* record = nullptr;
};

struct BatchJob {
    std::vector<Request> items;
    std::size_t model = 0;
    double start_ms = 0.0;
    double finish_ms = 0.0;

    std::uint32_t batch_size() const { return static_cast<std::uint32_t>(items.size()); }
};

struct ServerOptions {
    double downlink_ms = 0.0;
    double swap_delay_ms = 0.0;
    double cooldown_ms = 15000.0;
    std::size_t history = 32;
};

struct SwitchRecord {
    double time_ms = 0.0;
    std::string from;
    std::string to;
};

enum class SwapOutcome { Applied, Pending, IgnoredSameModel, IgnoredCooldown, IgnoredAlreadyPending };

/// The shared edge server: FIFO queue, dynamic batching, one deployed model.
class Server {
  public:
    Server(std::vector<ServerModelProfile> catalog, std::size_t deployed, ServerOptions options);

    void on_request(Engine& engine, const Request& request);
    void on_batch_complete(Engine& engine);
    void on_swap_complete(Engine& engine);

    /// Swaps the deployed model, deferring to the next batch boundary when busy.
    SwapOutcome request_swap(Engine& engine, std::size_t target);

    const std::vector<ServerModelProfile>& catalog() const { return catalog_; }
    std::size_t deployed() const { return deployed_; }
    const ServerModelProfile& deployed_model() const { return catalog_[deployed_]; }
    std::optional<std::size_t> pending_swap() const { return pending_swap_; }
    bool busy() const { return busy_; }
    std::size_t queue_len() const { return queue_.size(); }
    const std::deque<std::uint32_t>& recent_batches() const { return recent_batches_; }
    std::uint32_t last_batch_size() const { return last_batch_size_; }
    const std::optional<BatchJob>& running() const { return running_; }
    const std::vector<SwitchRecord>& switches() const { return switches_; }
    std::uint64_t ignored_swaps() const { return ignored_swaps_; }
    std::uint64_t served() const { return served_; }
    std::uint64_t received() const { return received_; }
    std::uint64_t batches() const { return batches_; }

  private:
    void dispatch(Engine& engine);
    void apply_swap(Engine& engine, std::size_t target);

    std::vector<ServerModelProfile> catalog_;
    std::size_t deployed_;
    ServerOptions options_;
    std::deque<Request> queue_;
    std::optional<BatchJob> running_;
    bool busy_ = false;
    bool swapping_ = false;
    std::optional<std::size_t> pending_swap_;
    std::optional<double> last_switch_ms_;
    std::deque<std::uint32_t> recent_batches_;
    std::uint32_t last_batch_size_ = 0;
    std::vector<SwitchRecord> switches_;
    std::uint64_t ignored_swaps_ = 0;
    std::uint64_t served_ = 0;
    std::uint64_t received_ = 0;
    std::uint64_t batches_ = 0;
};

}  // namespace edgecasc
