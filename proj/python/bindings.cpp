#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "audreg/checker.hpp"
#include "audreg/codec.hpp"
#include "audreg/consensus.hpp"
#include "audreg/errors.hpp"
#include "audreg/history_io.hpp"
#include "audreg/workload.hpp"

namespace py = pybind11;
using namespace audreg;

namespace {

// Words are arbitrary-precision; they cross the boundary as Python ints.
py::int_ to_py(const Word& w) { return py::int_(py::str(w.str())); }
Word from_py(const py::int_& i) { return Word(py::str(i).cast<std::string>()); }

Verdict run_check(const std::string& text, int definition, bool oracle) {
  const Definition d = parse_definition(std::to_string(definition));
  const History h = parse_history(text);
  return oracle ? brute_force_oracle(h, d) : check(h, d);
}

std::string run_workload(const std::string& algorithm, const std::string& script, std::optional<std::uint64_t> seed,
                         std::optional<std::vector<std::uint32_t>> schedule) {
  const Workload w = builtin_workload(algorithm, script);
  auto sim = instantiate(w);
  if (schedule) {
    Schedule s;
    for (auto p : *schedule) s.order.push_back(ProcessId(p));
    run(*sim, s);
  } else if (seed) {
    run_random(*sim, *seed);
  } else {
    run_round_robin(*sim);
  }
  return to_lines(sim->history());
}

py::dict explore(const std::string& algorithm, const std::string& script, bool exhaustive, std::uint64_t seed,
                 std::size_t count, std::optional<int> definition) {
  const Workload w = builtin_workload(algorithm, script);
  Definition d = Definition::AtomicAudit;
  for (const auto& r : w.registers) {
    if (r.algorithm == Algorithm::A7) d = Definition::RegularAudit;
  }
  if (definition) d = parse_definition(std::to_string(*definition));
  std::size_t runs = 0;
  std::size_t rejected = 0;
  py::object counterexample = py::none();
  const RunVisitor visit = [&](const RunRecord& run) {
    ++runs;
    const Verdict v = check(run.sim.history(), d);
    if (v.accepted) return true;
    ++rejected;
    counterexample = py::str(to_lines(run.sim.history()));
    return false;
  };
  {
    py::gil_scoped_release release;
    if (exhaustive) {
      explore_exhaustive(make_factory(w), ExploreOptions{}, visit);
    } else {
      explore_random(make_factory(w), seed, count, RandomOptions{}, visit);
    }
  }
  py::dict out;
  out["schedules"] = runs;
  out["rejected"] = rejected;
  out["definition"] = static_cast<int>(d);
  out["counterexample"] = counterexample;
  return out;
}

py::dict consensus(const std::vector<std::int64_t>& inputs, bool exhaustive, std::uint64_t seed, std::size_t count,
                   bool crashes, const std::string& backend) {
  std::vector<Value> values;
  for (auto v : inputs) values.push_back(Value::of(v));
  const auto [alg, mutant] = parse_algorithm_tag(backend);
  if (alg != Algorithm::A6 && values.size() != 2) throw UsageError("the two-process protocol takes two inputs");
  ConsensusConfig cfg =
      alg == Algorithm::A6 ? n_process_config(values) : two_process_config(values[0], values[1], alg);
  cfg.mutant = mutant;
  cfg.validate();
  ConsensusTally t;
  {
    py::gil_scoped_release release;
    if (exhaustive) {
      ExploreOptions opt;
      opt.crashes = crashes;
      if (cfg.protocol == ConsensusProtocol::NProcess && cfg.n() > 2) opt.preemption_bound = 2;
      t = consensus_exhaustive(cfg, opt);
    } else {
      RandomOptions opt;
      opt.crash_probability = crashes ? 0.02 : 0.0;
      t = consensus_random(cfg, seed, count, opt);
    }
  }
  py::dict out;
  out["runs"] = t.runs;
  out["crashed_runs"] = t.crashed_runs;
  out["agreement"] = t.agreement_violations;
  out["validity"] = t.validity_violations;
  out["termination"] = t.termination_violations;
  out["safe_values"] = t.safe_values_mismatches;
  out["violations"] = t.violations();
  return out;
}

}  // namespace

PYBIND11_MODULE(_audreg, m) {
  m.doc() = "Auditable register simulation, history checking and consensus harnesses";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<BoundExceeded>(m, "BoundExceeded", PyExc_RuntimeError);

  py::class_<Verdict>(m, "Verdict")
      .def_readonly("accepted", &Verdict::accepted)
      .def_readonly("witness", &Verdict::witness)
      .def_property_readonly("condition",
                             [](const Verdict& v) -> std::optional<std::string> {
                               if (!v.violation) return std::nullopt;
                               return std::string(to_string(v.violation->condition));
                             })
      .def_property_readonly("ops",
                             [](const Verdict& v) {
                               return v.violation ? v.violation->ops : std::vector<OpId>{};
                             })
      .def_property_readonly("detail",
                             [](const Verdict& v) { return v.violation ? v.violation->detail : std::string(); })
      .def("__bool__", [](const Verdict& v) { return v.accepted; })
      .def("__repr__", [](const Verdict& v) {
        const Definition d = v.violation ? v.violation->definition : Definition::AtomicAudit;
        return "<" + format_verdict(v, d) + ">";
      });

  m.def(
      "check", [](const std::string& text, int definition) { return run_check(text, definition, false); },
      py::arg("history"), py::arg("definition") = 1, "Check a history given in the line format.");
  m.def(
      "oracle", [](const std::string& text, int definition) { return run_check(text, definition, true); },
      py::arg("history"), py::arg("definition") = 1, "Brute-force verdict for histories of at most 8 operations.");
  m.def("run", &run_workload, py::arg("algorithm") = "a3", py::arg("script") = "demo", py::arg("seed") = py::none(),
        py::arg("schedule") = py::none(), "Run a built-in workload once and return its history lines.");
  m.def("explore", &explore, py::arg("algorithm"), py::arg("script") = "standard", py::arg("exhaustive") = true,
        py::arg("seed") = 1, py::arg("count") = 1000, py::arg("definition") = py::none());
  m.def("consensus", &consensus, py::arg("inputs"), py::arg("exhaustive") = true, py::arg("seed") = 1,
        py::arg("count") = 1000, py::arg("crashes") = true, py::arg("backend") = "a5",
        "Backend a5 or a3 runs the two-process protocol; a6 runs the n-process one.");
  m.def("algorithms", &all_algorithm_tags);

  py::enum_<Layout>(m, "Layout").value("VALUE_BITS", Layout::ValueBits).value("INTERLEAVED", Layout::Interleaved);
  py::class_<WordCodec>(m, "WordCodec")
      .def(py::init<Layout, unsigned>(), py::arg("layout"), py::arg("reader_bits"))
      .def("encode",
           [](const WordCodec& c, const py::int_& value, const py::int_& sn, std::uint64_t bits) {
             return to_py(c.encode(from_py(value), from_py(sn), bits));
           },
           py::arg("value"), py::arg("sn") = 0, py::arg("bits") = 0)
      .def("decode", [](const WordCodec& c, const py::int_& word) {
        const DecodedWord d = c.decode(from_py(word));
        return py::make_tuple(to_py(d.value), to_py(d.sn), d.bits);
      });
}
