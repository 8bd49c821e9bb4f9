#include "shield/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "shield/error.hpp"

namespace shield {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 10> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
constexpr std::string_view kUnclusteredColor = "#b0b0b0";

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string num(double v) { return format_fixed(v, 2); }

std::string_view cluster_color(std::optional<std::size_t> cluster) {
  return cluster ? kPalette[*cluster % kPalette.size()] : kUnclusteredColor;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json meta_json(const ReportMeta& meta) {
  return {
      {"k", meta.k},
      {"arm_names", meta.arm_names},
      {"gamma", meta.gamma},
      {"tau", meta.tau},
      {"draws", meta.draws},
      {"seed", meta.seed},
      {"version", meta.version},
      {"summary", meta.summary},
      {"dropped_terms", meta.dropped_terms},
  };
}

ReportMeta meta_from_json(const json& j) {
  ReportMeta meta;
  meta.k = j.at("k").get<std::size_t>();
  meta.arm_names = j.at("arm_names").get<std::vector<std::string>>();
  meta.gamma = j.at("gamma").get<double>();
  meta.tau = j.at("tau").get<double>();
  meta.draws = j.at("draws").get<std::size_t>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  meta.version = j.at("version").get<std::string>();
  meta.summary = j.at("summary").get<std::string>();
  meta.dropped_terms = j.at("dropped_terms").get<std::vector<std::string>>();
  return meta;
}

void require_finite(double v, std::string_view what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InternalError, "non-finite " + std::string(what));
}

}  // namespace

double fold_change(double ic) { return std::exp2(ic); }

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  std::string out(buf.data(), static_cast<std::size_t>(std::max(n, 0)));
  if (out.starts_with('-') && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

std::vector<SummaryRow> build_summary(const IncidenceTable& table, const SignalStats* stats,
                                      std::span<const ClusterLabel> labels) {
  const std::size_t m = table.num_terms();
  const std::size_t k = table.num_arms();
  if (k >= 2 && (stats == nullptr || stats->terms.size() != m)) {
    throw Error(ErrorCode::InternalError, "signal statistics do not cover the incidence table");
  }

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < m; ++i) row_of.emplace(table.pt_names()[i], i);
  std::vector<const ClusterLabel*> label_of(m, nullptr);
  for (const auto& label : labels) {
    for (const auto& pt : label.member_pts) {
      const auto it = row_of.find(pt);
      if (it == row_of.end()) {
        throw Error(ErrorCode::InternalError, "clustered PT '" + pt + "' is not in the table");
      }
      if (label_of[it->second] != nullptr) {
        throw Error(ErrorCode::InternalError, "PT '" + pt + "' belongs to two clusters");
      }
      label_of[it->second] = &label;
    }
  }

  std::vector<SummaryRow> rows(m);
  for (std::size_t i = 0; i < m; ++i) {
    SummaryRow& row = rows[i];
    row.pt = table.pt_names()[i];
    if (label_of[i] != nullptr) {
      row.cluster = label_of[i]->label;
      row.cluster_id = label_of[i]->cluster_id;
    }
    const auto counts = table.row(i);
    row.counts.assign(counts.begin(), counts.end());
    row.n_subjects = table.n_subjects();
    for (std::size_t j = 0; j < k; ++j) {
      row.incidence.push_back(std::to_string(counts[j]) + "/" + std::to_string(table.n_subjects()[j]));
    }

    if (k == 1) {
      row.incidence_proportion =
          static_cast<double>(counts[0]) / static_cast<double>(table.n_subjects()[0]);
      row.fold_change_text = format_fixed(*row.incidence_proportion, 4);
      continue;
    }
    const TermSignal& t = stats->terms[i];
    row.adjusted_ic = t.adjusted_ic(stats->summary);
    row.ic_lower = t.ic.lower;
    row.ic_upper = t.ic.upper;
    row.raw_ic = t.raw_ic;
    row.p_value = t.p_value;
    row.sign = t.sign;
    for (const auto& rr : t.rr) row.rr_median.push_back(rr.median);
    for (double v : {*row.adjusted_ic, *row.ic_lower, *row.ic_upper, *row.raw_ic, *row.p_value}) {
      require_finite(v, "signal statistic for '" + row.pt + "'");
    }
    row.fold_change_text = num(fold_change(*row.adjusted_ic));
    row.ci_text = "(" + num(fold_change(*row.ic_lower)) + ", " + num(fold_change(*row.ic_upper)) + ")";
    row.raw_ratio_text = num(fold_change(*row.raw_ic));
    row.p_value_text = format_fixed(*row.p_value, 4);
  }
  return rows;
}

GraphExport build_graph_export(const UtilityGraph& u, std::span<const SummaryRow> rows,
                               const ReportMeta& meta) {
  const std::size_t m = u.size();
  if (rows.size() != m) throw Error(ErrorCode::InternalError, "graph and summary sizes differ");
  GraphExport g;
  g.meta = meta;
  g.nodes.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (rows[i].pt != u.terms[i]) throw Error(ErrorCode::InternalError, "graph and summary PT order differ");
    GraphNode node;
    node.id = i;
    node.pt = rows[i].pt;
    node.cluster = rows[i].cluster_id;
    node.label = rows[i].cluster;
    node.node_weight = u.matrix(i, i);
    node.ic_lower = rows[i].ic_lower;
    if (rows[i].adjusted_ic) node.fold_change = fold_change(*rows[i].adjusted_ic);
    node.c = rows[i].counts;
    node.n = rows[i].n_subjects;
    g.nodes.push_back(std::move(node));
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      if (u.matrix(i, j) > 0.0) g.edges.push_back({i, j, u.matrix(i, j)});
    }
  }
  return g;
}

std::string export_graph_json(const GraphExport& graph) {
  json nodes = json::array();
  for (const auto& n : graph.nodes) {
    json incidence = json::array();
    for (std::size_t j = 0; j < n.c.size(); ++j) incidence.push_back({{"c", n.c[j]}, {"n", n.n[j]}});
    nodes.push_back({
        {"id", n.id},
        {"pt", n.pt},
        {"cluster", n.cluster ? json(*n.cluster) : json(nullptr)},
        {"label", n.label},
        {"node_weight", n.node_weight},
        {"ic_lower", optional_number(n.ic_lower)},
        {"fold_change", optional_number(n.fold_change)},
        {"incidence", std::move(incidence)},
    });
  }
  json edges = json::array();
  for (const auto& e : graph.edges) {
    edges.push_back({{"source", e.source}, {"target", e.target}, {"weight", e.weight}});
  }
  const json doc = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"meta", meta_json(graph.meta)}};
  return doc.dump(2) + "\n";
}

GraphExport parse_graph_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    GraphExport g;
    g.meta = meta_from_json(doc.at("meta"));
    for (const auto& n : doc.at("nodes")) {
      GraphNode node;
      node.id = n.at("id").get<std::size_t>();
      node.pt = n.at("pt").get<std::string>();
      if (!n.at("cluster").is_null()) node.cluster = n.at("cluster").get<std::size_t>();
      node.label = n.at("label").get<std::string>();
      node.node_weight = n.at("node_weight").get<double>();
      if (!n.at("ic_lower").is_null()) node.ic_lower = n.at("ic_lower").get<double>();
      if (!n.at("fold_change").is_null()) node.fold_change = n.at("fold_change").get<double>();
      for (const auto& inc : n.at("incidence")) {
        node.c.push_back(inc.at("c").get<std::int64_t>());
        node.n.push_back(inc.at("n").get<std::int64_t>());
      }
      g.nodes.push_back(std::move(node));
    }
    for (const auto& e : doc.at("edges")) {
      g.edges.push_back({e.at("source").get<std::size_t>(), e.at("target").get<std::size_t>(),
                         e.at("weight").get<double>()});
    }
    return g;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("graph JSON: ") + e.what());
  }
}

std::string render_dendrogram_svg(const DendrogramInput& in) {
  const std::size_t n = in.leaf_names.size();
  constexpr double kRow = 18.0, kTop = 40.0, kTreeLeft = 20.0, kTreeWidth = 260.0;
  constexpr double kLabelWidth = 280.0, kBarHalf = 120.0;
  const double tree_right = kTreeLeft + kTreeWidth;
  const double bar_zero = tree_right + kLabelWidth + kBarHalf;
  const double width = bar_zero + kBarHalf + 20.0;
  const double legend_rows = static_cast<double>(in.cluster_labels.size());
  const double height = kTop + kRow * static_cast<double>(std::max<std::size_t>(n, 1)) + 30.0 + kRow * legend_rows;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (n == 0) {
    svg << "<text x=\"20\" y=\"30\">No clustered preferred terms</text>\n</svg>\n";
    return svg.str();
  }
  if (in.merges.size() + 1 != n || in.leaf_cluster.size() != n || in.bar_value.size() != n ||
      in.bar_lower.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "dendrogram input sizes are inconsistent");
  }

  const std::size_t root = n + in.merges.size() - 1;
  const auto order = n == 1 ? std::vector<std::size_t>{0} : subtree_leaves(in.merges, n, root);

  std::vector<double> y(n + in.merges.size()), x(n + in.merges.size(), tree_right);
  std::vector<std::optional<std::size_t>> node_cluster(n + in.merges.size());
  std::vector<char> uniform(n + in.merges.size(), 1);
  for (std::size_t r = 0; r < order.size(); ++r) {
    y[order[r]] = kTop + kRow * (static_cast<double>(r) + 0.5);
    node_cluster[order[r]] = in.leaf_cluster[order[r]];
  }
  double max_dist = 0.0;
  for (const auto& mg : in.merges) max_dist = std::max(max_dist, mg.distance);
  for (std::size_t t = 0; t < in.merges.size(); ++t) {
    const auto& mg = in.merges[t];
    const std::size_t id = n + t;
    y[id] = 0.5 * (y[mg.left] + y[mg.right]);
    x[id] = tree_right - (max_dist > 0.0 ? mg.distance / max_dist : 0.0) * kTreeWidth;
    uniform[id] = uniform[mg.left] && uniform[mg.right] && node_cluster[mg.left] &&
                  node_cluster[mg.left] == node_cluster[mg.right];
    if (uniform[id]) node_cluster[id] = node_cluster[mg.left];
  }

  svg << "<text x=\"" << num(kTreeLeft) << "\" y=\"20\" font-weight=\"bold\">Ward dendrogram</text>\n";
  svg << "<text x=\"" << num(bar_zero) << "\" y=\"20\" text-anchor=\"middle\" font-weight=\"bold\">"
      << xml_escape(in.bar_caption) << "</text>\n";

  svg << "<g id=\"branches\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (std::size_t t = 0; t < in.merges.size(); ++t) {
    const auto& mg = in.merges[t];
    const std::size_t id = n + t;
    const auto color = [&](std::size_t child) {
      return uniform[child] && node_cluster[child] ? cluster_color(node_cluster[child]) : kUnclusteredColor;
    };
    for (std::size_t child : {mg.left, mg.right}) {
      svg << "<path stroke=\"" << color(child) << "\" d=\"M" << num(x[child]) << ',' << num(y[child])
          << " H" << num(x[id]) << "\"/>\n";
    }
    const auto vcolor = uniform[id] ? cluster_color(node_cluster[id]) : kUnclusteredColor;
    svg << "<path stroke=\"" << vcolor << "\" d=\"M" << num(x[id]) << ',' << num(y[mg.left]) << " V"
        << num(y[mg.right]) << "\"/>\n";
  }
  svg << "</g>\n";

  double scale = 0.0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    scale = std::max(scale, std::abs(in.bar_value[leaf]));
    if (in.bar_lower[leaf]) scale = std::max(scale, std::abs(*in.bar_lower[leaf]));
  }
  scale = scale > 0.0 ? (kBarHalf - 10.0) / scale : 0.0;

  svg << "<line x1=\"" << num(bar_zero) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(bar_zero)
      << "\" y2=\"" << num(kTop + kRow * static_cast<double>(n)) << "\" stroke=\"black\"/>\n";
  svg << "<g id=\"leaves\">\n";
  for (std::size_t leaf : order) {
    const auto color = cluster_color(in.leaf_cluster[leaf]);
    svg << "<text class=\"leaf\" x=\"" << num(tree_right + 6.0) << "\" y=\"" << num(y[leaf] + 4.0)
        << "\" fill=\"" << (in.leaf_cluster[leaf] ? color : std::string_view("#555555")) << "\">"
        << xml_escape(in.leaf_names[leaf]) << "</text>\n";
    const double v = in.bar_value[leaf] * scale;
    const double bx = v >= 0.0 ? bar_zero : bar_zero + v;
    svg << "<rect class=\"bar\" x=\"" << num(bx) << "\" y=\"" << num(y[leaf] - 6.0) << "\" width=\""
        << num(std::abs(v)) << "\" height=\"12\" fill=\"" << color << "\" fill-opacity=\"0.7\"/>\n";
    if (in.bar_lower[leaf]) {
      const double lx = bar_zero + *in.bar_lower[leaf] * scale;
      svg << "<line class=\"lower\" x1=\"" << num(lx) << "\" y1=\"" << num(y[leaf] - 7.0) << "\" x2=\""
          << num(lx) << "\" y2=\"" << num(y[leaf] + 7.0) << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
  }
  svg << "</g>\n";

  svg << "<g id=\"legend\">\n";
  const double legend_top = kTop + kRow * static_cast<double>(n) + 24.0;
  for (std::size_t c = 0; c < in.cluster_labels.size(); ++c) {
    const double ly = legend_top + kRow * static_cast<double>(c);
    svg << "<rect x=\"" << num(kTreeLeft) << "\" y=\"" << num(ly - 9.0)
        << "\" width=\"10\" height=\"10\" fill=\"" << cluster_color(c) << "\"/>\n";
    svg << "<text x=\"" << num(kTreeLeft + 16.0) << "\" y=\"" << num(ly) << "\">"
        << xml_escape(in.cluster_labels[c]) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string summary_csv(const ReportBundle& bundle) {
  const bool multi = bundle.meta.k >= 2;
  std::ostringstream out;
  out << "cluster,pt";
  if (multi) {
    out << ",adjusted_signal,adjusted_signal_ci,raw_signal_ratio,p_value";
    if (bundle.meta.k == 2) out << ",sign";
  } else {
    out << ",incidence_proportion";
  }
  for (const auto& arm : bundle.meta.arm_names) out << ',' << csv::escape(arm);
  out << '\n';
  for (const auto& row : bundle.rows) {
    out << csv::escape(row.cluster) << ',' << csv::escape(row.pt);
    if (multi) {
      out << ',' << row.fold_change_text << ',' << csv::escape(row.ci_text) << ',' << row.raw_ratio_text
          << ',' << row.p_value_text;
      if (bundle.meta.k == 2) out << ',' << (row.sign ? std::to_string(*row.sign) : "");
    } else {
      out << ',' << row.fold_change_text;
    }
    for (const auto& inc : row.incidence) out << ',' << inc;
    out << '\n';
  }
  return out.str();
}

namespace {

json label_json(const ClusterLabel& label) {
  return {{"id", label.cluster_id},
          {"label", label.label},
          {"source", std::string(to_string(label.source))},
          {"members", label.member_pts}};
}

}  // namespace

std::string summary_json(const ReportBundle& bundle) {
  json rows = json::array();
  for (const auto& row : bundle.rows) {
    json r = {
        {"pt", row.pt},
        {"cluster", row.cluster},
        {"cluster_id", row.cluster_id ? json(*row.cluster_id) : json(nullptr)},
        {"counts", row.counts},
        {"n_subjects", row.n_subjects},
        {"incidence", row.incidence},
    };
    if (bundle.meta.k >= 2) {
      r["adjusted_ic"] = *row.adjusted_ic;
      r["ic_lower"] = *row.ic_lower;
      r["ic_upper"] = *row.ic_upper;
      r["raw_ic"] = *row.raw_ic;
      r["p_value"] = *row.p_value;
      r["fold_change"] = fold_change(*row.adjusted_ic);
      r["ci_fold_change"] = {fold_change(*row.ic_lower), fold_change(*row.ic_upper)};
      r["raw_signal_ratio"] = fold_change(*row.raw_ic);
      r["rr_median"] = row.rr_median;
      r["text"] = {{"adjusted_signal", row.fold_change_text},
                   {"adjusted_signal_ci", row.ci_text},
                   {"raw_signal_ratio", row.raw_ratio_text},
                   {"p_value", row.p_value_text}};
      if (row.sign) r["sign"] = *row.sign;
    } else {
      r["incidence_proportion"] = *row.incidence_proportion;
    }
    rows.push_back(std::move(r));
  }
  json clusters = json::array();
  for (const auto& c : bundle.clusters) clusters.push_back(label_json(c));
  json doc = {{"meta", meta_json(bundle.meta)}, {"rows", std::move(rows)}, {"clusters", std::move(clusters)}};
  if (!bundle.hierarchy_labels.empty()) {
    json hier = json::array();
    for (const auto& c : bundle.hierarchy_labels) hier.push_back(label_json(c));
    doc["hierarchy_labels"] = std::move(hier);
  }
  return doc.dump(2) + "\n";
}

std::string_view stub_viewer_script() {
  return R"JS((function () {
  var data = JSON.parse(document.getElementById("shield-graph").textContent);
  var root = document.getElementById("shield-viewer");
  var k = data.meta.k;
  var size = function (n) { return k >= 2 ? (n.ic_lower || 0) : n.node_weight; };
  var maxSize = Math.max.apply(null, data.nodes.map(size).concat([1e-12]));
  var maxW = Math.max.apply(null, data.edges.map(function (e) { return e.weight; }).concat([0]));
  var W = 720, H = 720, R = 300, ns = "http://www.w3.org/2000/svg";
  var palette = ["#1f77b4","#ff7f0e","#2ca02c","#d62728","#9467bd","#8c564b","#e377c2","#17becf","#bcbd22","#7f7f7f"];
  var pos = data.nodes.map(function (n, i) {
    var a = 2 * Math.PI * i / Math.max(data.nodes.length, 1);
    return [W / 2 + R * Math.cos(a), H / 2 + R * Math.sin(a)];
  });
  var controls = document.createElement("div");
  var slider = document.createElement("input");
  slider.type = "range"; slider.min = 0; slider.max = maxW; slider.step = maxW / 200 || 1; slider.value = 0;
  var counter = document.createElement("span");
  controls.appendChild(document.createTextNode("Edge threshold "));
  controls.appendChild(slider); controls.appendChild(counter);
  root.appendChild(controls);
  var svg = document.createElementNS(ns, "svg");
  svg.setAttribute("width", W); svg.setAttribute("height", H);
  root.appendChild(svg);
  var lines = data.edges.map(function (e) {
    var l = document.createElementNS(ns, "line");
    l.setAttribute("x1", pos[e.source][0]); l.setAttribute("y1", pos[e.source][1]);
    l.setAttribute("x2", pos[e.target][0]); l.setAttribute("y2", pos[e.target][1]);
    l.setAttribute("stroke", "#999"); l.setAttribute("stroke-width", 0.5 + 3 * e.weight / (maxW || 1));
    svg.appendChild(l); return l;
  });
  data.nodes.forEach(function (n, i) {
    var c = document.createElementNS(ns, "circle");
    c.setAttribute("cx", pos[i][0]); c.setAttribute("cy", pos[i][1]);
    c.setAttribute("r", 3 + 12 * size(n) / maxSize);
    c.setAttribute("fill", n.cluster === null ? "#b0b0b0" : palette[n.cluster % palette.length]);
    var t = document.createElementNS(ns, "title"); t.textContent = n.pt + " (" + n.label + ")";
    c.appendChild(t); svg.appendChild(c);
  });
  function update() {
    var t = parseFloat(slider.value), visible = 0;
    data.edges.forEach(function (e, i) {
      var on = e.weight >= t; lines[i].style.display = on ? "" : "none"; if (on) visible++;
    });
    counter.textContent = " " + visible + " / " + data.edges.length + " edges, " + data.nodes.length + " nodes";
  }
  slider.addEventListener("input", update);
  update();
})();
)JS";
}

std::string render_html_report(const ReportBundle& bundle, std::string_view viewer_assets, bool no_viewer) {
  if (!no_viewer && viewer_assets.empty()) {
    throw Error(ErrorCode::ConfigError, "viewer assets are missing (build the viewer or pass --no-viewer)");
  }
  const bool multi = bundle.meta.k >= 2;
  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
       << "<title>SHIELD safety signal report</title>\n<style>\n"
       << "body{font-family:sans-serif;margin:24px;}table{border-collapse:collapse;font-size:12px;}"
       << "th,td{border:1px solid #ccc;padding:3px 6px;}th{background:#f0f0f0;}"
       << "td.num{text-align:right;}\n</style>\n</head>\n<body>\n";
  html << "<h1>Adverse event signal report</h1>\n<p>Arms: ";
  for (std::size_t j = 0; j < bundle.meta.arm_names.size(); ++j) {
    html << (j ? "; " : "") << xml_escape(bundle.meta.arm_names[j]);
  }
  html << ". Credible level " << format_fixed(bundle.meta.gamma, 2) << ", minimum similarity "
       << format_fixed(bundle.meta.tau, 2) << ", " << bundle.meta.draws << " posterior draws, seed "
       << bundle.meta.seed << ".</p>\n";
  if (!bundle.meta.dropped_terms.empty()) {
    html << "<p>PTs without embeddings (excluded): ";
    for (std::size_t i = 0; i < bundle.meta.dropped_terms.size(); ++i) {
      html << (i ? ", " : "") << xml_escape(bundle.meta.dropped_terms[i]);
    }
    html << "</p>\n";
  }

  html << "<h2>Summary</h2>\n<table id=\"summary\">\n<thead><tr><th>Cluster</th><th>PT</th>";
  if (multi) {
    html << "<th>Adjusted Signal</th><th>Adjusted Signal (CI)</th><th>Raw Signal Ratio</th><th>p-value</th>";
    if (bundle.meta.k == 2) html << "<th>Sign</th>";
  } else {
    html << "<th>Incidence</th>";
  }
  for (const auto& arm : bundle.meta.arm_names) html << "<th>" << xml_escape(arm) << "</th>";
  html << "</tr></thead>\n<tbody>\n";
  for (const auto& row : bundle.rows) {
    html << "<tr><td>" << xml_escape(row.cluster) << "</td><td>" << xml_escape(row.pt) << "</td>";
    if (multi) {
      html << "<td class=\"num\">" << row.fold_change_text << "</td><td class=\"num\">" << row.ci_text
           << "</td><td class=\"num\">" << row.raw_ratio_text << "</td><td class=\"num\">" << row.p_value_text
           << "</td>";
      if (bundle.meta.k == 2) html << "<td class=\"num\">" << (row.sign ? std::to_string(*row.sign) : "") << "</td>";
    } else {
      html << "<td class=\"num\">" << row.fold_change_text << "</td>";
    }
    for (const auto& inc : row.incidence) html << "<td class=\"num\">" << inc << "</td>";
    html << "</tr>\n";
  }
  html << "</tbody>\n</table>\n";

  html << "<h2>Dendrogram</h2>\n" << bundle.dendrogram_svg;

  if (!no_viewer) {
    std::string graph = export_graph_json(bundle.graph);
    // Keep the inline JSON from closing its own script element.
    for (std::size_t pos = graph.find("</"); pos != std::string::npos; pos = graph.find("</", pos + 3)) {
      graph.replace(pos, 2, "<\\/");
    }
    html << "<h2>Network graph</h2>\n<div id=\"shield-viewer\"></div>\n"
         << "<script type=\"application/json\" id=\"shield-graph\">\n" << graph << "</script>\n"
         << "<script>\n" << viewer_assets << "\n</script>\n";
  }
  html << "</body>\n</html>\n";
  return html.str();
}

void write_report_files(const ReportBundle& bundle, const std::string& html, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "': " + ec.message());
  const auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + (dir / name).string() + "'");
  };
  write("summary.csv", summary_csv(bundle));
  write("summary.json", summary_json(bundle));
  write("graph.json", export_graph_json(bundle.graph));
  write("dendrogram.svg", bundle.dendrogram_svg);
  write("report.html", html);
}

}  // namespace shield
