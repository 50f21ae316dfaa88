#pragma once

#include "mcot/backend.hpp"

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace mcot {

// Prompt -> response store keyed by SHA-256 of the prompt text, persisted as
// JSON lines: {"prompt_sha256", "prompt", "response", "recorded_at"}.
class ReplayStore {
public:
    ReplayStore() = default;

    static ReplayStore load(const std::string& path);

    void record(const std::string& prompt, const std::string& response_text);

    std::optional<std::string> lookup(const std::string& prompt) const;

    void save(const std::string& path) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& warnings() const { return warnings_; }

private:
    struct Entry {
        std::string prompt;
        std::string response;
        std::string recorded_at;
    };
    std::map<std::string, Entry> entries_;  // key: sha256 hex
    std::vector<std::string> warnings_;
};

class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(ReplayStore store) : store_(std::move(store)) {}

    BackendResponse complete(const BackendRequest& request) override;
    std::string provider_tag() const override { return "replay"; }
    int in_flight_limit() const override { return 64; }

    const ReplayStore& store() const { return store_; }

private:
    ReplayStore store_;
};

// Records every completion of an inner backend into a store.
class RecordingBackend : public Backend {
public:
    RecordingBackend(Backend& inner, ReplayStore& store) : inner_(inner), store_(store) {}

    BackendResponse complete(const BackendRequest& request) override;
    std::string provider_tag() const override { return inner_.provider_tag(); }
    int in_flight_limit() const override { return inner_.in_flight_limit(); }

private:
    Backend& inner_;
    ReplayStore& store_;
    std::mutex mutex_;
};

} // namespace mcot
