#include "bct/bct_api.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "bct/analysis.hpp"
#include "bct/harness.hpp"
#include "bct/protocol.hpp"

struct bct_config {
    bct::harness::ExperimentConfig value;
};

struct bct_table {
    bct::harness::SweepTable value;
};

namespace {

using namespace bct;

thread_local std::string g_last_error;

bct_status fail(bct_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Maps exceptions from the core onto status codes.
template <typename F>
bct_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return BCT_OK;
    } catch (const harness::ConfigError& e) {
        return fail(BCT_CONFIG, e.what());
    } catch (const harness::IoError& e) {
        return fail(BCT_IO, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(BCT_INVALID_ARGUMENT, e.what());
    } catch (const std::domain_error& e) {
        return fail(BCT_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(BCT_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(BCT_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(BCT_INTERNAL, e.what());
    } catch (...) {
        return fail(BCT_INTERNAL, "unknown error");
    }
}

std::uint64_t parse_count(const std::string& key, const std::string& text) {
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
        throw harness::ConfigError(key + " must be a non-negative integer, got '" + text + "'");
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw harness::ConfigError(key + " is out of range: '" + text + "'");
    }
}

void set_key(harness::ExperimentConfig& c, const std::string& key, const std::string& value) {
    try {
        if (key == "trials") c.trials = parse_count(key, value);
        else if (key == "seed") c.seed = parse_count(key, value);
        else if (key == "workers") {
            const auto w = parse_count(key, value);
            if (w < 1 || w > 1024) throw harness::ConfigError("workers must be in 1..1024");
            c.workers = static_cast<unsigned>(w);
        }
        else if (key == "strategy") c.strategy.flip_rule = protocol::parse_flip_rule(value);
        else if (key == "flip-semantics") c.strategy.flip_semantics = protocol::parse_flip_semantics(value);
        else if (key == "coin") c.coin_mode = protocol::parse_coin_mode(value);
        else if (key == "format") c.format = harness::parse_format(value);
        else if (key == "out") c.output_path = value;
        else if (key == "alice") c.alice = harness::parse_number(value);
        else if (key == "bob") c.bob = harness::parse_number(value);
        else if (key == "alice-grid") c.alice_grid = harness::parse_grid(value);
        else if (key == "angle-grid") c.angle_grid = harness::parse_grid(value);
        else if (key == "nu-grid") c.nu_grid = harness::parse_grid(value);
        else if (key == "theta-grid") c.theta_grid = harness::parse_grid(value);
        else if (key == "visibility-grid") c.visibility_grid = harness::parse_grid(value);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    } catch (const harness::ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        // Parser rejections are configuration errors; unknown keys stay invalid arguments.
        if (std::string(e.what()).rfind("unknown config key", 0) == 0) throw;
        throw harness::ConfigError(key + ": " + e.what());
    }
}

bct_status copy_out(const std::string& text, char* buf, size_t cap, size_t* needed) {
    if (needed) *needed = text.size();
    if (cap > 0) {
        if (!buf) return fail(BCT_INVALID_ARGUMENT, "buffer is null but capacity is nonzero");
        const size_t n = std::min(cap - 1, text.size());
        std::memcpy(buf, text.data(), n);
        buf[n] = '\0';
    }
    return BCT_OK;
}

}  // namespace

extern "C" {

bct_status bct_config_create(const char* experiment, bct_config** out) {
    if (!experiment || !out) return fail(BCT_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        const auto e = harness::parse_experiment(experiment);
        *out = new bct_config{harness::default_config(e)};
    });
}

void bct_config_destroy(bct_config* config) { delete config; }

bct_status bct_config_set(bct_config* config, const char* key, const char* value) {
    if (!config || !key || !value) return fail(BCT_INVALID_ARGUMENT, "null argument");
    return guarded([&] { set_key(config->value, key, value); });
}

bct_status bct_run(const bct_config* config, bct_table** out) {
    if (!config || !out) return fail(BCT_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new bct_table{harness::run_experiment(config->value)}; });
}

void bct_table_destroy(bct_table* table) { delete table; }

size_t bct_table_rows(const bct_table* table) { return table ? table->value.rows.size() : 0; }

bct_status bct_table_write(const bct_table* table, const char* format, const char* path) {
    if (!table || !format) return fail(BCT_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        harness::emit(table->value, harness::parse_format(format), path ? path : "");
    });
}

bct_status bct_table_render(const bct_table* table, const char* format, char* buf, size_t cap,
                            size_t* needed) {
    if (!table || !format) return fail(BCT_INVALID_ARGUMENT, "null argument");
    std::string text;
    const auto status =
        guarded([&] { text = harness::render(table->value, harness::parse_format(format)); });
    if (status != BCT_OK) return status;
    return copy_out(text, buf, cap, needed);
}

bct_status bct_trial_dump(const bct_config* config, double a, double b, char* buf, size_t cap,
                          size_t* needed) {
    if (!config) return fail(BCT_INVALID_ARGUMENT, "null argument");
    std::string text;
    const auto status = guarded([&] {
        const auto& c = config->value;
        Rng rng(substream_seed(c.seed, 0, 0));
        const auto r = protocol::two_bob_trial(geometry::Angle(a), geometry::Angle(b), rng,
                                               c.strategy, c.coin_mode);
        text = protocol::to_json(r.record1) + "\n" + protocol::to_json(r.record2) + "\n";
    });
    if (status != BCT_OK) return status;
    return copy_out(text, buf, cap, needed);
}

const char* bct_last_error(void) { return g_last_error.c_str(); }

const char* bct_version(void) {
    static const std::string version(harness::kVersion);
    return version.c_str();
}

bct_status bct_qm_prob_equal(double a, double b, double* out) {
    if (!out) return fail(BCT_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *out = qm::qm_prob_equal(geometry::Angle(a), geometry::Angle(b)); });
}

bct_status bct_p_opposite_equal(double nu, double* p1, double* p2, double* total) {
    return guarded([&] {
        const auto p = analysis::p_opposite_equal_closed(nu);
        if (p1) *p1 = p.p1;
        if (p2) *p2 = p.p2;
        if (total) *total = p.total;
    });
}

bct_status bct_visibility_threshold(double nu, double* out) {
    if (!out) return fail(BCT_INVALID_ARGUMENT, "null argument");
    return guarded([&] { *out = analysis::visibility_threshold(nu); });
}

}  // extern "C"
