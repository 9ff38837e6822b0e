#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "strux/distill.hpp"
#include "strux/harness.hpp"
#include "strux/metrics.hpp"
#include "strux/prompt.hpp"
#include "strux/renderer.hpp"
#include "strux/struct_parser.hpp"

namespace py = pybind11;
using namespace strux;

namespace {

RenderStyle style_from_arg(const std::string& name) {
  auto style = render_style_from_name(name);
  if (!style) throw py::value_error("style must be nested, enumerated, or flattened");
  return *style;
}

TokenPolicy policy_from_arg(const std::string& name) {
  if (name == "rouge") return TokenPolicy::Rouge;
  if (name == "squad") return TokenPolicy::Squad;
  throw py::value_error("policy must be rouge or squad");
}

PromptMode prompt_mode_from_arg(const std::string& name) {
  auto mode = prompt_mode_from_name(name);
  if (!mode) throw py::value_error("mode must be fewshot, zeroshot, abs, or qbs");
  return *mode;
}

}  // namespace

PYBIND11_MODULE(_strux, m) {
  m.doc() = "Context structurization core: three-layer trees, parsing, rendering, and metrics";

  py::class_<Aspect>(m, "Aspect")
      .def(py::init<std::string, std::vector<std::string>>(), py::arg("title"),
           py::arg("descriptions"))
      .def_readwrite("title", &Aspect::title)
      .def_readwrite("descriptions", &Aspect::descriptions)
      .def("__eq__", [](const Aspect& a, const Aspect& b) { return a == b; })
      .def("__repr__", [](const Aspect& a) {
        return "Aspect(title=" + a.title + ", descriptions=" +
               std::to_string(a.descriptions.size()) + ")";
      });

  py::class_<StructuredContext>(m, "StructuredContext")
      .def(py::init<std::string, std::vector<Aspect>>(), py::arg("scope"), py::arg("aspects"))
      .def_readwrite("scope", &StructuredContext::scope)
      .def_readwrite("aspects", &StructuredContext::aspects)
      .def("__eq__",
           [](const StructuredContext& a, const StructuredContext& b) { return a == b; })
      .def("__repr__", [](const StructuredContext& c) {
        return "StructuredContext(scope=" + c.scope + ", aspects=" +
               std::to_string(c.aspects.size()) + ")";
      });

  py::class_<PrfScore>(m, "PrfScore")
      .def_readonly("precision", &PrfScore::precision)
      .def_readonly("recall", &PrfScore::recall)
      .def_readonly("f1", &PrfScore::f1)
      .def("__repr__", [](const PrfScore& s) {
        return "PrfScore(precision=" + std::to_string(s.precision) +
               ", recall=" + std::to_string(s.recall) + ", f1=" + std::to_string(s.f1) + ")";
      });

  m.def(
      "validate",
      [](const StructuredContext& ctx) {
        py::list out;
        for (const Violation& v : validate(ctx).entries)
          out.append(py::make_tuple(v.path, v.message,
                                    v.severity == Severity::Error ? "error" : "warning"));
        return out;
      },
      py::arg("context"), "Structural violations as (path, message, severity) tuples");

  m.def(
      "parse_output",
      [](const std::string& raw) {
        const ParseOutcome outcome = parse_output(raw);
        py::dict out;
        out["status"] = parse_status_name(outcome.status);
        out["context"] = outcome.context ? py::cast(*outcome.context) : py::none();
        out["diagnostics"] = outcome.diagnostics;
        return out;
      },
      py::arg("raw"), "Parse raw model output into a structure (schema-tolerant)");

  m.def("repair", [](const std::string& raw) { return repair(raw); }, py::arg("raw"));

  m.def(
      "render",
      [](const StructuredContext& ctx, const std::string& style) {
        return render(ctx, style_from_arg(style));
      },
      py::arg("context"), py::arg("style") = "nested");

  m.def("canonical_json", &canonical_json, py::arg("context"));

  m.def(
      "build_structurize_prompt",
      [](const std::string& text, const std::string& mode) {
        return build_structurize_prompt(text, prompt_mode_from_arg(mode)).messages[0].content;
      },
      py::arg("text"), py::arg("mode") = "zeroshot");

  m.def(
      "build_baseline_prompt",
      [](const std::string& text, const std::string& mode,
         const std::optional<std::string>& query) {
        return build_baseline_prompt(text, prompt_mode_from_arg(mode), query)
            .messages[0]
            .content;
      },
      py::arg("text"), py::arg("mode") = "abs", py::arg("query") = py::none());

  m.def(
      "normalize_tokens",
      [](const std::string& text, const std::string& policy) {
        return normalize_tokens(text, policy_from_arg(policy));
      },
      py::arg("text"), py::arg("policy") = "rouge");

  m.def("rouge_l", &rouge_l, py::arg("candidate"), py::arg("reference"));
  m.def("lexical_eval", &lexical_eval, py::arg("context"), py::arg("original"));
  m.def("qa_f1", &qa_f1, py::arg("prediction"), py::arg("gold_answers"));
  m.def("greedy_semantic_f1", &greedy_semantic_f1, py::arg("candidate_embeddings"),
        py::arg("reference_embeddings"));
  m.def("ndcg_at_k", &ndcg_at_k, py::arg("ranked_relevances"), py::arg("k"));

  m.def(
      "per_class_accuracy",
      [](const std::vector<std::string>& preds, const std::vector<std::string>& golds,
         const std::vector<std::string>& labels) {
        const ClassAccuracy acc = per_class_accuracy(preds, golds, labels);
        py::dict per_label;
        for (const auto& [label, value] : acc.per_label)
          per_label[py::str(label)] = value ? py::cast(*value) : py::none();
        return py::make_tuple(per_label, acc.macro);
      },
      py::arg("predictions"), py::arg("golds"), py::arg("labels"));

  m.def(
      "truncate_middle",
      [](const std::vector<std::string>& tokens, size_t max_len) {
        return truncate_middle(tokens, max_len);
      },
      py::arg("tokens"), py::arg("max_len"));

  m.def("truncate_text_middle", &truncate_text_middle, py::arg("text"), py::arg("max_tokens"));

  py::class_<HashEmbedder>(m, "HashEmbedder")
      .def(py::init<size_t>(), py::arg("dimension") = 32)
      .def("embed",
           [](const HashEmbedder& e, const std::string& text) {
             const Embedding emb = e.embed(text);
             return py::make_tuple(emb.tokens, emb.vectors);
           })
      .def_property_readonly("dimension", &HashEmbedder::dimension);

  m.def(
      "semantic_eval",
      [](const StructuredContext& ctx, const std::string& original, const HashEmbedder& embedder) {
        return semantic_eval(ctx, original, embedder);
      },
      py::arg("context"), py::arg("original"), py::arg("embedder"));

  m.def("extract_attr_label", &extract_attr_label, py::arg("response"));

  m.attr("attribution_labels") = attribution_labels();
}
