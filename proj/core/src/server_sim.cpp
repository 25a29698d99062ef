#include "edgecasc/server_sim.hpp"

#include <algorithm>

#include "edgecasc/error.hpp"

namespace edgecasc {

std::optional<std::uint32_t> select_batch(std::size_t queue_len, const ServerModelProfile& model) {
    if (queue_len == 0) return std::nullopt;
    const std::size_t cap = std::min<std::size_t>(queue_len, model.max_batch());
    std::uint32_t best = 1;
    for (auto b : kAllowedBatches) {
        if (b <= cap) best = b;
    }
    return best;
}

Server::Server(std::vector<ServerModelProfile> catalog, std::size_t deployed, ServerOptions options)
    : catalog_(std::move(catalog)), deployed_(deployed), options_(options) {
    if (catalog_.empty()) throw ValidationError("server catalog is empty");
    if (deployed_ >= catalog_.size()) throw ValidationError("deployed model not in catalog");
    if (options_.history == 0) throw ValidationError("batch history length must be > 0");
}

void Server::on_request(Engine& engine, const Request& request) {
    if (request.record == nullptr) throw SimulationError("request without trace record");
    ++received_;
    queue_.push_back(request);
    dispatch(engine);
}

void Server::dispatch(Engine& engine) {
    if (busy_ || swapping_) return;
    const auto& model = catalog_[deployed_];
    const auto batch = select_batch(queue_.size(), model);
    if (!batch) return;

    BatchJob job;
    job.model = deployed_;
    job.start_ms = engine.now();
    job.finish_ms = engine.now() + model.batch_latency_ms(*batch);
    job.items.assign(queue_.begin(), queue_.begin() + *batch);
    queue_.erase(queue_.begin(), queue_.begin() + *batch);
    last_batch_size_ = *batch;

    SimEvent done;
    done.time_ms = job.finish_ms;
    done.kind = EventKind::BatchComplete;
    done.actor = kServerActor;
    done.sample = batches_;
    engine.schedule(done);
    running_ = std::move(job);
    busy_ = true;
}

void Server::on_batch_complete(Engine& engine) {
    if (!busy_ || !running_) throw SimulationError("batch completion while idle");
    const BatchJob job = std::move(*running_);
    running_.reset();
    busy_ = false;
    ++batches_;

    for (const auto& item : job.items) {
        SimEvent res;
        res.time_ms = engine.now() + options_.downlink_ms;
        res.kind = EventKind::ResultDelivery;
        res.actor = item.device;
        res.sample = item.sample_id;
        res.flag = item.record->heavy_correct.at(job.model) != 0;
        engine.schedule(res);
        ++served_;
    }
    recent_batches_.push_back(job.batch_size());
    while (recent_batches_.size() > options_.history) recent_batches_.pop_front();

    if (pending_swap_) {
        const std::size_t target = *pending_swap_;
        pending_swap_.reset();
        apply_swap(engine, target);
        return;
    }
    dispatch(engine);
}

void Server::on_swap_complete(Engine& engine) {
    swapping_ = false;
    dispatch(engine);
}

void Server::apply_swap(Engine& engine, std::size_t target) {
    switches_.push_back({engine.now(), catalog_[deployed_].model_id(), catalog_[target].model_id()});
    deployed_ = target;
    last_switch_ms_ = engine.now();
    if (options_.swap_delay_ms > 0.0) {
        swapping_ = true;
        SimEvent ev;
        ev.time_ms = engine.now() + options_.swap_delay_ms;
        ev.kind = EventKind::SwapComplete;
        ev.actor = kServerActor;
        engine.schedule(ev);
    } else {
        dispatch(engine);
    }
}

SwapOutcome Server::request_swap(Engine& engine, std::size_t target) {
    if (target >= catalog_.size()) throw ValidationError("swap target not in catalog");
    if (target == deployed_) return SwapOutcome::IgnoredSameModel;
    if (pending_swap_ || swapping_) {
        ++ignored_swaps_;
        return SwapOutcome::IgnoredAlreadyPending;
    }
    if (last_switch_ms_ && engine.now() - *last_switch_ms_ < options_.cooldown_ms) {
        ++ignored_swaps_;
        return SwapOutcome::IgnoredCooldown;
    }
    if (busy_) {
        pending_swap_ = target;
        return SwapOutcome::Pending;
    }
    apply_swap(engine, target);
    return SwapOutcome::Applied;
}

}  // namespace edgecasc
