#ifndef EVENTCHRON_GRAPH_IO_HPP
#define EVENTCHRON_GRAPH_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eventchron/bayesnet.hpp"
#include "eventchron/dag.hpp"

namespace eventchron::bn {

// Edge-list format:
//   #nodes<TAB>a<TAB>b<TAB>...        declared node order (optional on read)
//   #isolated<TAB>c<TAB>...           nodes without incident edges
//   a<TAB>b                           one edge per line, parent first
void write_edge_list(std::ostream& out, const Dag& g);
Dag read_edge_list(std::istream& in);
void save_edge_list(const std::filesystem::path& path, const Dag& g);
Dag load_edge_list(const std::filesystem::path& path);

struct DotOptions {
    std::string graph_name = "G";
    /// Nodes sharing a rank value are drawn on the same row.
    std::map<std::string, std::size_t> ranks;
    /// Edges drawn dashed (e.g. orientation forced by variable order).
    std::vector<std::pair<std::string, std::string>> dashed;
};
std::string to_dot(const Dag& g, const DotOptions& options = {});

/// {nodes, edges: [[parent, child]], cpts: [{node, parents, p1_by_assignment}]}
std::string network_to_json(const DiscreteBayesNet& bn);
DiscreteBayesNet network_from_json(const std::string& text);

}  // namespace eventchron::bn

#endif  // EVENTCHRON_GRAPH_IO_HPP
