#include "eventchron/graph_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eventchron/error.hpp"

namespace eventchron::bn {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) {
        if (!field.empty()) out.push_back(field);
    }
    return out;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_edge_list(std::ostream& out, const Dag& g) {
    out << "#nodes";
    for (const auto& n : g.nodes()) out << '\t' << n;
    out << "\n#isolated";
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (g.parents(v).empty() && g.children(v).empty()) out << '\t' << g.label(v);
    }
    out << '\n';
    for (const auto& e : g.edges()) out << g.label(e.from) << '\t' << g.label(e.to) << '\n';
}

Dag read_edge_list(std::istream& in) {
    std::vector<std::string> declared;
    std::vector<std::string> order;
    std::set<std::string> seen;
    const auto note = [&](const std::string& n) {
        if (seen.insert(n).second) order.push_back(n);
    };
    std::vector<std::pair<std::string, std::string>> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (line.rfind("#nodes", 0) == 0) {
            declared.assign(fields.begin() + 1, fields.end());
            continue;
        }
        if (line.rfind("#isolated", 0) == 0) {
            for (auto it = fields.begin() + 1; it != fields.end(); ++it) note(*it);
            continue;
        }
        if (line.front() == '#') continue;
        if (fields.size() != 2) {
            throw ValidationError("edge list line " + std::to_string(line_no) + ": expected 'parent<TAB>child'");
        }
        note(fields[0]);
        note(fields[1]);
        edges.emplace_back(fields[0], fields[1]);
    }
    if (!declared.empty()) {
        std::set<std::string> decl(declared.begin(), declared.end());
        for (const auto& n : order) {
            if (!decl.count(n)) throw ValidationError("node '" + n + "' missing from #nodes header");
        }
        return Dag(declared, edges);
    }
    return Dag(order, edges);
}

void save_edge_list(const std::filesystem::path& path, const Dag& g) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    write_edge_list(out, g);
}

Dag load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    return read_edge_list(in);
}

std::string to_dot(const Dag& g, const DotOptions& options) {
    std::ostringstream out;
    out << "digraph " << quoted(options.graph_name) << " {\n";
    out << "  rankdir=TB;\n";
    for (const auto& n : g.nodes()) out << "  " << quoted(n) << ";\n";
    if (!options.ranks.empty()) {
        std::map<std::size_t, std::vector<std::string>> by_rank;
        for (const auto& n : g.nodes()) {
            if (auto it = options.ranks.find(n); it != options.ranks.end()) by_rank[it->second].push_back(n);
        }
        for (const auto& [rank, members] : by_rank) {
            out << "  { rank=same;";
            for (const auto& m : members) out << ' ' << quoted(m) << ';';
            out << " }  // level " << rank << '\n';
        }
    }
    const std::set<std::pair<std::string, std::string>> dashed(options.dashed.begin(), options.dashed.end());
    for (const auto& [p, c] : g.labeled_edges()) {
        out << "  " << quoted(p) << " -> " << quoted(c);
        if (dashed.count({p, c})) out << " [style=dashed]";
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

std::string network_to_json(const DiscreteBayesNet& bn) {
    const auto& g = bn.dag();
    nlohmann::ordered_json doc;
    doc["nodes"] = g.nodes();
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& [p, c] : g.labeled_edges()) doc["edges"].push_back({p, c});
    doc["cpts"] = nlohmann::ordered_json::array();
    for (const auto& c : bn.cpts()) {
        std::vector<std::string> parents;
        for (auto p : c.parents) parents.push_back(g.label(p));
        doc["cpts"].push_back({{"node", g.label(c.node)}, {"parents", parents}, {"p1_by_assignment", c.p1}});
    }
    return doc.dump(2);
}

DiscreteBayesNet network_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("network JSON: ") + e.what());
    }
    try {
        const auto nodes = doc.at("nodes").get<std::vector<std::string>>();
        std::vector<std::pair<std::string, std::string>> edges;
        for (const auto& e : doc.at("edges")) edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
        Dag g(nodes, edges);
        std::vector<Cpt> cpts(g.size());
        std::vector<bool> filled(g.size(), false);
        for (const auto& c : doc.at("cpts")) {
            const auto v = g.index_of(c.at("node").get<std::string>());
            Cpt cpt{v, {}, c.at("p1_by_assignment").get<std::vector<double>>()};
            for (const auto& p : c.at("parents")) cpt.parents.push_back(g.index_of(p.get<std::string>()));
            cpts[v] = std::move(cpt);
            filled[v] = true;
        }
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (!filled[v]) throw ValidationError("network JSON: no CPT for '" + g.label(v) + "'");
        }
        return DiscreteBayesNet(std::move(g), std::move(cpts));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("network JSON: ") + e.what());
    }
}

}  // namespace eventchron::bn
