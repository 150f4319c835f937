#pragma once

#include "babel17/analyze.hpp"
#include "babel17/value.hpp"

#include <atomic>
#include <deque>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

namespace babel17 {

enum class RunMode { Production, Test };

struct EngineConfig {
    RunMode mode = RunMode::Production;
    bool pragmas_enabled = true;
    std::optional<unsigned long> seed;
    int workers = 2;
    std::function<void(const std::string&)> log_sink; // default: stderr
};

struct PragmaEvent {
    SourcePos pos;
    std::string kind;
    bool ok = true;
    std::string rendered;
    std::vector<std::string> module_path;
};

// One loaded module. DOWN -> LOADING -> UP, or DOWN -> LOADING -> FAILED when
// an init statement produced a dynamic exception (the exception is kept and
// re-raised on every later send).
struct ModuleRec {
    ModuleDecl decl;
    enum class St { Down, Loading, Up, Failed };
    St st = St::Down;
    std::mutex m;
    std::condition_variable cv;
    std::atomic<std::thread::id> loader{}; // read by the deadlock chain walk
    Env members; // module frame after loading
    Value failure;
    std::map<std::string, std::shared_ptr<UserTypeDef>> typedefs;
};

class Engine {
public:
    explicit Engine(EngineConfig cfg = {}) : cfg_(std::move(cfg)) {
        gmp_randinit_mt(rand_);
        unsigned long seed = cfg_.seed ? *cfg_.seed : std::random_device{}();
        gmp_randseed_ui(rand_, seed);
        urng_.seed(seed);
        int n = std::max(1, cfg_.workers);
        for (int i = 0; i < n; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }

    ~Engine() {
        {
            std::lock_guard<std::mutex> lock(pool_m_);
            stopping_ = true;
            queue_.clear(); // abandoned concurrent thunks are dropped
        }
        pool_cv_.notify_all();
        for (auto& t : workers_) t.join();
    }

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    const EngineConfig& config() const { return cfg_; }
    RunMode mode() const { return cfg_.mode; }
    bool pragmas_enabled() const { return cfg_.pragmas_enabled; }

    // ---- program -------------------------------------------------------------

    void install(CompiledProgram prog) {
        program_ = std::move(prog);
        for (auto& [path, decl] : program_.modules) {
            auto rec = std::make_shared<ModuleRec>();
            rec->decl = decl;
            records_[path] = rec;
        }
    }

    const CompiledProgram& program() const { return program_; }

    // Incremental module registration (REPL :load).
    void add_modules(const StmtPtr& module_stmt) {
        register_module_into(program_, module_stmt, {});
        for (auto& [path, decl] : program_.modules) {
            if (records_.count(path)) continue;
            finalize_module_decl(decl);
            auto rec = std::make_shared<ModuleRec>();
            rec->decl = decl;
            records_[path] = rec;
        }
    }

    std::shared_ptr<ModuleRec> find_record(const std::vector<std::string>& path) {
        auto it = records_.find(path);
        return it == records_.end() ? nullptr : it->second;
    }

    bool is_module_prefix(const std::vector<std::string>& p) const { return program_.is_module_prefix(p); }

    // ---- logging / pragma reports ---------------------------------------------

    void log(const std::string& line) {
        std::lock_guard<std::mutex> lock(log_m_);
        if (cfg_.log_sink) cfg_.log_sink(line);
        else std::cerr << line << "\n";
        log_lines_.push_back(line);
    }

    std::vector<std::string> log_lines() {
        std::lock_guard<std::mutex> lock(log_m_);
        return log_lines_;
    }

    void record_pragma(PragmaEvent ev) {
        std::lock_guard<std::mutex> lock(report_m_);
        events_.push_back(std::move(ev));
    }

    std::vector<PragmaEvent> pragma_events() {
        std::lock_guard<std::mutex> lock(report_m_);
        return events_;
    }

    // ---- randomness ------------------------------------------------------------

    Int random_below(const Int& n) {
        std::lock_guard<std::mutex> lock(rand_m_);
        mpz_class r;
        mpz_urandomm(r.get_mpz_t(), rand_, n.raw().get_mpz_t());
        return Int(r);
    }

    // ---- worker pool -------------------------------------------------------------

    void submit(std::function<void()> task) {
        {
            std::lock_guard<std::mutex> lock(pool_m_);
            if (stopping_) return;
            queue_.push_back(std::move(task));
        }
        pool_cv_.notify_one();
    }

    // ---- deadlock surveillance -----------------------------------------------------
    //
    // Blocked senders form a wait-for graph: thread -> module it waits on; a
    // LOADING module maps to its loader thread. A cycle means DeadLock for every
    // blocked sender in it.

    struct WaitToken {
        std::shared_ptr<bool> dead = std::make_shared<bool>(false);
    };

    // Returns nullopt if waiting would deadlock (the cycle is poisoned instead).
    std::optional<WaitToken> begin_wait(ModuleRec* target) {
        return begin_wait_entry(WaitEntry{target, nullptr, target->loader.load(), nullptr});
    }

    // Waiting for a thunk evaluated by `owner`.
    std::optional<WaitToken> begin_wait_thunk(Thunk* target, std::thread::id owner) {
        return begin_wait_entry(WaitEntry{nullptr, target, owner, nullptr});
    }

    void end_wait() {
        std::lock_guard<std::mutex> lock(wait_m_);
        waits_.erase(std::this_thread::get_id());
    }

private:
    struct WaitEntry {
        ModuleRec* module;
        Thunk* thunk;
        std::thread::id next; // loader / thunk owner at registration time
        std::shared_ptr<bool> dead;
    };

    std::optional<WaitToken> begin_wait_entry(WaitEntry entry) {
        std::lock_guard<std::mutex> lock(wait_m_);
        std::thread::id self = std::this_thread::get_id();
        // follow the chain: blocked-on -> responsible thread -> its wait -> ...
        std::vector<std::thread::id> chain;
        std::thread::id cur = entry.module ? entry.module->loader.load() : entry.next;
        for (;;) {
            if (cur == self) {
                poison_cycle(chain);
                return std::nullopt;
            }
            chain.push_back(cur);
            auto it = waits_.find(cur);
            if (it == waits_.end()) break;
            cur = it->second.module ? it->second.module->loader.load() : it->second.next;
        }
        WaitToken token;
        entry.dead = token.dead;
        waits_[self] = std::move(entry);
        return token;
    }

    void poison_cycle(const std::vector<std::thread::id>& chain) {
        for (auto tid : chain) {
            auto it = waits_.find(tid);
            if (it == waits_.end()) continue;
            *it->second.dead = true;
            if (it->second.module) it->second.module->cv.notify_all();
            if (it->second.thunk) it->second.thunk->cv.notify_all();
        }
    }

    void worker_loop() {
        for (;;) {
            std::function<void()> task;
            {
                std::unique_lock<std::mutex> lock(pool_m_);
                pool_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
                if (stopping_) return;
                task = std::move(queue_.front());
                queue_.pop_front();
            }
            task();
        }
    }

    EngineConfig cfg_;
    CompiledProgram program_;
    std::map<std::vector<std::string>, std::shared_ptr<ModuleRec>> records_;

    std::mutex log_m_;
    std::vector<std::string> log_lines_;
    std::mutex report_m_;
    std::vector<PragmaEvent> events_;

    std::mutex rand_m_;
    gmp_randstate_t rand_;
    std::mt19937_64 urng_;

    std::mutex pool_m_;
    std::condition_variable pool_cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;

    std::mutex wait_m_;
    std::map<std::thread::id, WaitEntry> waits_;
};

} // namespace babel17
