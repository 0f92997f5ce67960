// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <unistd.h>

#include "../common/random_history.hpp"
#include "audreg/checker.hpp"
#include "audreg/codec.hpp"
#include "audreg/consensus.hpp"
#include "audreg/history_io.hpp"
#include "audreg/registers.hpp"
#include "audreg/workload.hpp"

using namespace audreg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr std::size_t kRandomRuns = 10'000;
constexpr std::uint64_t kSeed = 1;

// ---------------------------------------------------------------------------
// Register campaigns

struct Campaign {
  std::size_t runs = 0;
  std::size_t distinct = 0;
  std::size_t rejected = 0;
  std::size_t structural = 0;
  std::optional<Verdict> first_rejection;
  std::vector<History> distinct_histories;
};

// Every A6 write fails compare&swap at most once per reader.
std::size_t cas_excess(const Simulation& sim) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < sim.register_count(); ++i) {
    const auto& reg = sim.register_at(static_cast<ObjectId>(i));
    if (reg.config().algorithm != Algorithm::A6 || !reg.word_cell()) continue;
    for (const auto& [op, fails] : cas_failures_by_op(sim.memory().cell(*reg.word_cell()))) {
      bad += fails > reg.reader_count() ? 1 : 0;
    }
  }
  return bad;
}

enum class Mode { Exhaustive, Random };

Campaign campaign(const Workload& w, Mode mode, Definition def, bool keep_histories = false,
                  bool stop_at_rejection = false) {
  Campaign c;
  std::unordered_map<std::string, bool> cache;
  const RunVisitor visit = [&](const RunRecord& run) {
    ++c.runs;
    const History& h = run.sim.history();
    std::string lines = to_lines(h);
    auto it = cache.find(lines);
    if (it == cache.end()) {
      const Verdict v = check(h, def);
      if (!v.accepted && !c.first_rejection) c.first_rejection = v;
      it = cache.emplace(std::move(lines), v.accepted).first;
      ++c.distinct;
      if (keep_histories) c.distinct_histories.push_back(h);
    }
    c.rejected += it->second ? 0 : 1;
    c.structural += cas_excess(run.sim);
    return !(stop_at_rejection && c.rejected > 0);
  };
  if (mode == Mode::Exhaustive) {
    explore_exhaustive(make_factory(w), ExploreOptions{}, visit);
  } else {
    explore_random(make_factory(w), kSeed, kRandomRuns, RandomOptions{}, visit);
  }
  return c;
}

std::string summary(const std::string& label, const Campaign& c) {
  std::ostringstream out;
  out << label << " " << c.runs << " runs/" << c.distinct << " histories/" << c.rejected << " rejected";
  return out.str();
}

Outcome all_accepted(const std::vector<std::string>& tags, Definition def, bool with_cas_bound) {
  Outcome o{true, ""};
  for (const auto& tag : tags) {
    const auto ex = campaign(builtin_workload(tag, "standard"), Mode::Exhaustive, def);
    const auto rnd = campaign(builtin_workload(tag, "large"), Mode::Random, def);
    for (const auto* c : {&ex, &rnd}) {
      o.pass = o.pass && c->rejected == 0 && c->runs > 0;
      if (with_cas_bound) o.pass = o.pass && c->structural == 0;
    }
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += summary(tag + " exhaustive", ex) + ", " + summary("random", rnd);
    if (with_cas_bound) o.detail += ", cas-bound violations " + std::to_string(ex.structural + rnd.structural);
  }
  return o;
}

Outcome criterion1() { return all_accepted({"a3"}, Definition::AtomicAudit, false); }
Outcome criterion2() { return all_accepted({"a4", "a5"}, Definition::AtomicAudit, false); }
Outcome criterion3() { return all_accepted({"a6"}, Definition::AtomicAudit, true); }

// An audit that omits (p, v) although p's read returning v overlaps it and
// began before a write of a newer value that completed before the audit.
bool overlapping_read_omitted(const History& h) {
  const auto ops = h.operations();
  for (const auto& a : ops) {
    if (a.kind != OpKind::Audit || !a.complete()) continue;
    for (const auto& r : ops) {
      if (r.kind != OpKind::Read || !r.complete() || r.object != a.object) continue;
      if (!(r.invoked_at < *a.responded_at && a.invoked_at < *r.responded_at)) continue;
      if (a.audit_value().count({r.process, r.read_value()})) continue;
      for (const auto& w : ops) {
        if (w.kind == OpKind::Write && w.object == a.object && w.complete() && *w.argument != r.read_value() &&
            r.invoked_at < *w.responded_at && *w.responded_at < a.invoked_at) {
          return true;
        }
      }
    }
  }
  return false;
}

// Canned run on an A7 register: p1's read takes its value, write(2) and an
// audit by p3 complete, then the read responds. With `audit_late` the audit
// runs after the read instead.
History canned_separation(bool audit_late) {
  auto sim = instantiate(parse_workload(
      "register 0 a7 initial 0 writer 0 readers 1 auditors 0,3\n"
      "process 0: write 1; write 2\n"
      "process 1: read\n"
      "process 3: audit\n"));
  auto op = [&](std::uint32_t p) {
    while (sim->step(ProcessId(p)) == StepOutcome::Continue) {
    }
  };
  op(0);
  sim->step(ProcessId(1));
  op(0);
  if (audit_late) {
    op(1);
    op(3);
  } else {
    op(3);
    op(1);
  }
  return sim->history();
}

Outcome criterion4() {
  Outcome o = all_accepted({"a7"}, Definition::RegularAudit, false);
  const auto ex = campaign(builtin_workload("a7", "standard"), Mode::Exhaustive, Definition::RegularAudit, true);
  std::size_t separating = 0;
  std::size_t stale_read_omitted = 0;
  for (const auto& h : ex.distinct_histories) {
    if (check(h, Definition::AtomicAudit).accepted) continue;
    ++separating;
    stale_read_omitted += overlapping_read_omitted(h) ? 1 : 0;
  }
  const History early = canned_separation(false);
  const History late = canned_separation(true);
  const auto audit_of = [](const History& h) {
    for (const auto& op : h.operations()) {
      if (op.kind == OpKind::Audit) return op.audit_value();
    }
    return AuditSet{};
  };
  const Verdict e1 = check(early, Definition::AtomicAudit);
  const bool canned_ok = audit_of(early).empty() && !e1.accepted &&
                         e1.violation->condition == Condition::Completeness &&
                         check(early, Definition::RegularAudit).accepted &&
                         audit_of(late) == AuditSet{{ProcessId(1), Value::of(1)}} &&
                         check(late, Definition::AtomicAudit).accepted &&
                         check(late, Definition::RegularAudit).accepted;
  o.pass = o.pass && separating > 0 && stale_read_omitted > 0 && canned_ok;
  o.detail += "; explored histories rejected by def 1 but accepted by def 2: " + std::to_string(separating) +
              " (" + std::to_string(stale_read_omitted) + " omit an overlapping stale read); canned scenario: audit {} " +
              (canned_ok ? "def1 reject/def2 accept, audit {(p1,1)} both accept" : "MISMATCH");
  return o;
}

// ---------------------------------------------------------------------------
// Consensus

std::string tally_text(const ConsensusTally& t) {
  std::ostringstream out;
  out << t.runs << " runs (" << t.crashed_runs << " with a crash), violations: agreement "
      << t.agreement_violations << " validity " << t.validity_violations << " termination "
      << t.termination_violations << " safe-values " << t.safe_values_mismatches;
  return out.str();
}

Outcome criterion5() {
  ExploreOptions opt;
  opt.crashes = true;
  opt.max_crashes = 1;
  const auto t = consensus_exhaustive(two_process_config(Value::of(3), Value::of(5), Algorithm::A5), opt);
  return {t.violations() == 0 && t.runs > 0 && t.crashed_runs > 0, "exhaustive " + tally_text(t)};
}

Outcome criterion6() {
  const auto cfg = n_process_config({Value::of(3), Value::of(5), Value::of(4)});
  ExploreOptions ex;
  ex.crashes = true;
  ex.preemption_bound = 2;
  const auto bounded = consensus_exhaustive(cfg, ex);
  RandomOptions rnd;
  rnd.crash_probability = 0.02;
  const auto random = consensus_random(cfg, 7, kRandomRuns, rnd);
  const bool ok = bounded.violations() == 0 && random.violations() == 0 && random.runs >= kRandomRuns;
  return {ok, "preemption-bounded (2) exhaustive " + tally_text(bounded) + "; random " + tally_text(random)};
}

// ---------------------------------------------------------------------------
// Checker against the brute-force oracle

Outcome criterion7() {
  std::mt19937_64 rng(7);
  const std::size_t samples = 1000;
  std::size_t agree = 0;
  std::size_t accepted[2] = {0, 0};
  std::size_t max_ops = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const History h = testing::random_history(rng, 8);
    max_ops = std::max(max_ops, h.operations().size());
    bool same = true;
    for (int d = 0; d < 2; ++d) {
      const auto def = d == 0 ? Definition::AtomicAudit : Definition::RegularAudit;
      const bool fast = check(h, def).accepted;
      same = same && fast == brute_force_oracle(h, def).accepted;
      accepted[d] += fast ? 1 : 0;
    }
    agree += same ? 1 : 0;
  }
  const bool mixed = accepted[0] > 0 && accepted[0] < samples && accepted[1] > 0 && accepted[1] < samples;
  std::ostringstream out;
  out << agree << "/" << samples << " histories agree on both definitions (max " << max_ops
      << " ops; accepted def1 " << accepted[0] << ", def2 " << accepted[1] << ")";
  return {agree == samples && mixed && max_ops <= 8, out.str()};
}

// ---------------------------------------------------------------------------
// Mutants

Outcome criterion8() {
  Outcome o{true, ""};
  for (const auto& tag : all_algorithm_tags()) {
    const auto [alg, mutant] = parse_algorithm_tag(tag);
    if (mutant == Mutant::None) continue;
    const Definition def = alg == Algorithm::A7 ? Definition::RegularAudit : Definition::AtomicAudit;
    // budget: exhaustive on the standard workload, then seeded random runs of the large one
    auto c = campaign(builtin_workload(tag, "standard"), Mode::Exhaustive, def, false, true);
    std::string where = "exhaustive standard";
    if (c.rejected == 0) {
      c = campaign(builtin_workload(tag, "large"), Mode::Random, def, false, true);
      where = "random large";
    }
    bool named = false;
    std::string cond = "none";
    if (c.first_rejection) {
      const Condition k = c.first_rejection->violation->condition;
      cond = std::string(to_string(k));
      named = k == Condition::Completeness || k == Condition::StrongAccuracy || k == Condition::RegisterSemantics;
    }
    o.pass = o.pass && c.rejected > 0 && named;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += tag + ": " + (c.rejected ? "rejected" : "NOT rejected") + " after " + std::to_string(c.runs) +
                " runs (" + where + "), " + cond;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Codec against a bit-at-a-time reference

Word naive_encode(Layout layout, unsigned n, const Word& value, const Word& sn, std::uint64_t bits) {
  Word w = 0;
  for (unsigned i = 0; i < n; ++i) {
    if ((bits >> i) & 1U) bit_set(w, i);
  }
  const unsigned vbits = static_cast<unsigned>(value == 0 ? 0 : msb(value) + 1);
  for (unsigned i = 0; i < vbits; ++i) {
    if (bit_test(value, i)) bit_set(w, layout == Layout::ValueBits ? n + i : n + 2 * i);
  }
  if (layout == Layout::Interleaved) {
    const unsigned sbits = static_cast<unsigned>(sn == 0 ? 0 : msb(sn) + 1);
    for (unsigned i = 0; i < sbits; ++i) {
      if (bit_test(sn, i)) bit_set(w, n + 2 * i + 1);
    }
  }
  return w;
}

DecodedWord naive_decode(Layout layout, unsigned n, const Word& w) {
  DecodedWord d{0, 0, 0};
  const unsigned width = static_cast<unsigned>(w == 0 ? 0 : msb(w) + 1);
  for (unsigned i = 0; i < width; ++i) {
    if (!bit_test(w, i)) continue;
    if (i < n) {
      d.bits |= std::uint64_t{1} << i;
    } else if (layout == Layout::ValueBits) {
      bit_set(d.value, i - n);
    } else if ((i - n) % 2 == 0) {
      bit_set(d.value, (i - n) / 2);
    } else {
      bit_set(d.sn, (i - n) / 2);
    }
  }
  return d;
}

Outcome criterion9() {
  std::mt19937_64 rng(9);
  const std::size_t per_layout = 10'000;
  std::size_t ok = 0;
  std::size_t total = 0;
  auto big = [&rng](unsigned max_bits) {
    const unsigned width = static_cast<unsigned>(rng() % (max_bits + 1));
    Word w = 0;
    for (unsigned i = 0; i < width; ++i) {
      if (rng() & 1U) bit_set(w, i);
    }
    return w;
  };
  for (const Layout layout : {Layout::ValueBits, Layout::Interleaved}) {
    for (std::size_t i = 0; i < per_layout; ++i) {
      const unsigned n = 1 + static_cast<unsigned>(rng() % 16);
      const WordCodec codec(layout, n);
      const Word value = big(48);
      const Word sn = layout == Layout::ValueBits ? Word(0) : big(40);
      const std::uint64_t bits = rng() & ((std::uint64_t{1} << n) - 1);
      const Word word = codec.encode(value, sn, bits);
      const DecodedWord expect{value, sn, bits};
      const bool good = word == naive_encode(layout, n, value, sn, bits) && codec.decode(word) == expect &&
                        naive_decode(layout, n, word) == expect && codec.get_bits(word) == bits &&
                        codec.get_value(word) == value;
      ok += good ? 1 : 0;
      ++total;
    }
  }
  return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " triples over both layouts"};
}

// ---------------------------------------------------------------------------
// Determinism

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Outcome criterion10() {
  const auto dir = std::filesystem::temp_directory_path() / ("audreg-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::size_t pairs = 0;
  std::size_t identical = 0;
  auto compare = [&](const std::string& a, const std::string& b, const std::string& name) {
    const auto fa = dir / (name + ".a");
    const auto fb = dir / (name + ".b");
    std::ofstream(fa, std::ios::binary) << a;
    std::ofstream(fb, std::ios::binary) << b;
    ++pairs;
    identical += (read_file(fa) == read_file(fb) && !a.empty()) ? 1 : 0;
  };
  for (const auto& tag : {"a3", "a4", "a5", "a6", "a7"}) {
    const Workload w = builtin_workload(tag, "large");
    for (std::uint64_t seed : {1, 42, 977}) {
      auto a = instantiate(w);
      auto b = instantiate(w);
      run_random(*a, seed);
      run_random(*b, seed);
      compare(a->dump(true), b->dump(true), std::string(tag) + "-seed" + std::to_string(seed));
      // the same interleaving replayed as an explicit schedule
      Schedule s;
      std::vector<ProcessId> order;
      {
        auto probe = instantiate(w);
        std::mt19937_64 rng(seed);
        while (!probe->enabled().empty()) {
          const auto en = probe->enabled();
          const ProcessId p = en[rng() % en.size()];
          probe->step(p);
          order.push_back(p);
        }
      }
      s.order = order;
      const std::string replayed = to_lines(run(w, s));
      compare(replayed, to_lines(run(w, s)), std::string(tag) + "-schedule" + std::to_string(seed));
      compare(replayed, to_lines(a->history()), std::string(tag) + "-seeded-vs-schedule" + std::to_string(seed));
    }
    auto x = explore_random(w, 5, 50);
    auto y = explore_random(w, 5, 50);
    std::string xs;
    std::string ys;
    for (const auto& h : x) xs += to_lines(h);
    for (const auto& h : y) ys += to_lines(h);
    compare(xs, ys, std::string(tag) + "-explore");
  }
  std::filesystem::remove_all(dir);
  return {pairs == identical, std::to_string(identical) + "/" + std::to_string(pairs) + " replay pairs byte-identical"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A3 exhaustive, atomic audit", criterion1},
      {"A4 and A5 exhaustive plus random, atomic audit", criterion2},
      {"A6 exhaustive plus random, atomic audit, cas failures per write <= n", criterion3},
      {"A7 regular audit, and a history separating the two definitions", criterion4},
      {"two-process consensus over A5, exhaustive with crashes", criterion5},
      {"three-process consensus over A6, bounded exhaustive plus random", criterion6},
      {"checker agrees with the brute-force oracle", criterion7},
      {"every built-in mutant is rejected with a named condition", criterion8},
      {"codec round trip against a bit-level reference", criterion9},
      {"replays are byte-identical", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " -- " << o.detail
              << " (" << std::fixed << std::setprecision(1) << secs << "s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
