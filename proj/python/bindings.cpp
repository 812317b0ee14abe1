#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mlcent/centrality.hpp"
#include "mlcent/cli.hpp"
#include "mlcent/error.hpp"
#include "mlcent/ingest.hpp"

namespace py = pybind11;
using namespace mlcent;

namespace {

EvalMode make_mode(const std::string& mode, int m, int block_size, const std::string& augment) {
    if (mode == "exact") return EvalMode::exact();
    if (mode == "krylov") return EvalMode::krylov(m, block_size, cli::parse_augmentation(augment));
    throw DomainError("mode must be 'exact' or 'krylov'");
}

ShiftConvention make_shift(bool shifted) { return shifted ? ShiftConvention::Shifted : ShiftConvention::Unshifted; }

py::dict report_dict(const CentralityReport& r) {
    py::dict d;
    py::list scores;
    for (const auto& s : r.scores) scores.append(py::make_tuple(s.index.node, s.index.layer, s.score));
    py::list ranking;
    for (const auto& idx : r.ranking) ranking.append(py::make_tuple(idx.node, idx.layer));
    d["measure"] = to_string(r.kind);
    d["scores"] = scores;
    d["ranking"] = ranking;
    d["lambda_max"] = r.lambda_max ? py::cast(*r.lambda_max) : py::none();
    d["pairwise"] = r.pairwise ? py::cast(*r.pairwise) : py::none();
    d["krylov_steps"] = r.krylov_steps;
    d["breakdown"] = r.breakdown;
    return d;
}

std::vector<TensorIndex> to_nodes(const std::vector<std::pair<int, int>>& pairs) {
    std::vector<TensorIndex> out;
    for (auto [n, l] : pairs) out.push_back({n, l});
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Centrality measures for multilayer networks";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    auto domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConditioningError>(m, "ConditioningError", domain.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());
    py::register_exception<SizeError>(m, "SizeError", base.ptr());

    py::class_<AdjacencyTensor>(m, "AdjacencyTensor")
        .def_property_readonly("n_nodes", &AdjacencyTensor::n_nodes)
        .def_property_readonly("n_layers", &AdjacencyTensor::n_layers)
        .def_property_readonly("nnz", &AdjacencyTensor::nnz)
        .def_property_readonly("is_symmetric", &AdjacencyTensor::is_symmetric)
        .def("entry", [](const AdjacencyTensor& a, int i, int l, int j, int k) { return a.entry({i, l}, {j, k}); })
        .def("to_dense", [](const AdjacencyTensor& a) { return DenseMatrix(a.matrix()); })
        .def("to_edge_list", &serialize_edge_list)
        .def("__eq__", [](const AdjacencyTensor& a, const AdjacencyTensor& b) { return a == b; });

    m.def("from_edges",
          [](int n, int l, const std::vector<std::tuple<int, int, int, int, double>>& edges, bool undirected) {
              std::vector<TensorEntry> entries;
              for (const auto& [i, li, j, lj, w] : edges) {
                  entries.push_back({{i, li}, {j, lj}, w});
                  if (undirected && !(i == j && li == lj)) entries.push_back({{j, lj}, {i, li}, w});
              }
              return AdjacencyTensor::from_entries(n, l, entries);
          },
          py::arg("n_nodes"), py::arg("n_layers"), py::arg("edges"), py::arg("undirected") = true);
    m.def("parse_edge_list",
          [](const std::string& text, bool strict) {
              std::istringstream in(text);
              return parse_edge_list(in, {strict});
          },
          py::arg("text"), py::arg("strict") = false);
    m.def("load_network", [](const std::filesystem::path& p, bool strict) { return load_network(p, {strict}).tensor; },
          py::arg("path"), py::arg("strict") = false);
    m.def("builtin_example1", &builtin_example1);
    m.def("flatten_index", [](int node, int layer, int n, int l) { return flatten_index({node, layer}, n, l); });
    m.def("unflatten_index", [](std::int64_t k, int n, int l) {
        const auto idx = unflatten_index(k, n, l);
        return py::make_tuple(idx.node, idx.layer);
    });
    m.def("einstein", py::overload_cast<const AdjacencyTensor&, const AdjacencyTensor&>(&einstein));

    m.def("dense_expm", &dense_expm, py::arg("h"), py::arg("beta") = 1.0);
    m.def("dense_resolvent", [](const DenseMatrix& h, double alpha) { return dense_resolvent(h, alpha); });
    m.def("effective_diameter", [](const std::vector<double>& c, double delta) { return effective_diameter(c, delta); });
    m.def("exponential_coefficients", &exponential_coefficients);
    m.def("lambda_max", [](const AdjacencyTensor& a, double tol, int max_iter) {
        return estimate_lambda_max(a, tol, max_iter).lambda_max;
    }, py::arg("tensor"), py::arg("tol") = 1e-8, py::arg("max_iter") = 5000);

    m.def("total_communicability",
          [](const AdjacencyTensor& a, double beta, const std::string& mode, int m_steps, bool shifted) {
              return report_dict(total_communicability_per_node(a, beta, make_mode(mode, m_steps, 1, "none"),
                                                                make_shift(shifted)));
          },
          py::arg("tensor"), py::arg("beta") = 1.0, py::arg("mode") = "exact", py::arg("m") = 10,
          py::arg("shifted") = false);
    m.def("katz",
          [](const AdjacencyTensor& a, std::optional<double> alpha, double relative, const std::string& mode,
             int m_steps, bool shifted) {
              const double value = alpha ? *alpha : relative_alpha(a, relative);
              return report_dict(katz_centrality(a, value, make_mode(mode, m_steps, 1, "none"), make_shift(shifted)));
          },
          py::arg("tensor"), py::arg("alpha") = py::none(), py::arg("relative") = 0.5, py::arg("mode") = "exact",
          py::arg("m") = 10, py::arg("shifted") = false);
    m.def("subgraph",
          [](const AdjacencyTensor& a, const std::string& family, std::optional<std::vector<std::pair<int, int>>> nodes,
             double beta, std::optional<double> alpha, double relative, const std::string& mode, int m_steps,
             int block_size, const std::string& augment, bool shifted) {
              const auto list = nodes ? to_nodes(*nodes) : all_node_layers(a.n_nodes(), a.n_layers());
              FunctionSpec spec;
              if (family == "exp") {
                  spec = measure_function(MeasureKind::SubgraphExp, beta, make_shift(shifted));
              } else if (family == "res") {
                  const double value = alpha ? *alpha : relative_alpha(a, relative);
                  spec = measure_function(MeasureKind::SubgraphRes, value, make_shift(shifted));
              } else {
                  throw DomainError("family must be 'exp' or 'res'");
              }
              return report_dict(subgraph_centralities(a, list, spec, make_mode(mode, m_steps, block_size, augment)));
          },
          py::arg("tensor"), py::arg("family") = "exp", py::arg("nodes") = py::none(), py::arg("beta") = 1.0,
          py::arg("alpha") = py::none(), py::arg("relative") = 0.5, py::arg("mode") = "exact", py::arg("m") = 10,
          py::arg("block_size") = kDefaultBlockSize, py::arg("augment") = "none", py::arg("shifted") = false);
}
