#include "mcot/replay_backend.hpp"

#include "mcot/errors.hpp"
#include "mcot/sha256.hpp"

#include <json.hpp>

#include <ctime>
#include <fstream>

namespace mcot {

namespace {

std::string now_rfc3339() {
    std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buffer[32];
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buffer;
}

} // namespace

ReplayStore ReplayStore::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoFailure("cannot open replay store: " + path);
    }
    ReplayStore store;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseFailure("replay store line " + std::to_string(line_no) + ": " + e.what());
        }
        for (const char* field : {"prompt_sha256", "prompt", "response", "recorded_at"}) {
            if (!doc.contains(field) || !doc[field].is_string()) {
                throw ParseFailure("replay store line " + std::to_string(line_no) +
                                   ": missing string field \"" + field + "\"");
            }
        }
        std::string key = doc["prompt_sha256"].get<std::string>();
        std::string prompt = doc["prompt"].get<std::string>();
        if (key != sha256_hex(prompt)) {
            throw ParseFailure("replay store line " + std::to_string(line_no) +
                               ": prompt_sha256 does not match prompt");
        }
        if (store.entries_.count(key)) {
            store.warnings_.push_back("replay store line " + std::to_string(line_no) +
                                      ": duplicate prompt " + key + "; latest entry wins");
        }
        store.entries_[key] = {prompt, doc["response"].get<std::string>(),
                               doc["recorded_at"].get<std::string>()};
    }
    return store;
}

void ReplayStore::record(const std::string& prompt, const std::string& response_text) {
    std::string key = sha256_hex(prompt);
    if (entries_.count(key)) {
        warnings_.push_back("re-recorded prompt " + key + "; latest response wins");
    }
    entries_[key] = {prompt, response_text, now_rfc3339()};
}

std::optional<std::string> ReplayStore::lookup(const std::string& prompt) const {
    auto it = entries_.find(sha256_hex(prompt));
    if (it == entries_.end()) return std::nullopt;
    return it->second.response;
}

void ReplayStore::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot write replay store: " + path);
    }
    for (const auto& [key, entry] : entries_) {
        nlohmann::ordered_json doc;
        doc["prompt_sha256"] = key;
        doc["prompt"] = entry.prompt;
        doc["response"] = entry.response;
        doc["recorded_at"] = entry.recorded_at;
        out << doc.dump() << '\n';
    }
    if (!out) {
        throw IoFailure("failed while writing replay store: " + path);
    }
}

BackendResponse ReplayBackend::complete(const BackendRequest& request) {
    validate_request(request);
    std::optional<std::string> response = store_.lookup(request.prompt.text);
    if (!response) {
        throw BackendFailure(BackendFailure::Kind::missing_recording,
                             "no recording for prompt sha256 " +
                                 sha256_hex(request.prompt.text),
                             false);
    }
    return {*response, std::chrono::milliseconds(0), provider_tag()};
}

BackendResponse RecordingBackend::complete(const BackendRequest& request) {
    BackendResponse response = inner_.complete(request);
    std::lock_guard<std::mutex> lock(mutex_);
    store_.record(request.prompt.text, response.text);
    return response;
}

} // namespace mcot
