#include "derflow/feeder.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace derflow {

std::vector<int> FeederModel::der_nodes() const {
    std::vector<int> out;
    out.reserve(ders.size());
    for (const auto& d : ders) out.push_back(d.node);
    return out;
}

std::vector<int> FeederModel::non_der_nodes() const {
    std::set<int> g(der_nodes().begin(), der_nodes().end());
    std::vector<int> out;
    for (int i = 1; i <= n(); ++i)
        if (!g.count(i)) out.push_back(i);
    return out;
}

void FeederModel::validate() const {
    if (node_count < 2) throw FeederError("feeder needs at least a slack bus and one node");
    auto check_node = [&](int idx, const char* what) {
        if (idx < 1 || idx > n())
            throw FeederError(std::string(what) + " node index " + std::to_string(idx) +
                              " outside 1.." + std::to_string(n()));
    };
    for (const auto& e : edges) {
        if (e.from < 0 || e.from > n() || e.to < 0 || e.to > n() || e.from == e.to)
            throw FeederError("bad edge endpoints " + std::to_string(e.from) + "-" +
                              std::to_string(e.to));
        if (std::abs(e.z) == 0.0)
            throw FeederError("degenerate edge " + std::to_string(e.from) + "-" +
                              std::to_string(e.to) + " has zero impedance");
    }
    std::set<int> der_seen;
    for (const auto& d : ders) {
        check_node(d.node, "DER");
        if (!der_seen.insert(d.node).second)
            throw FeederError("duplicate DER at node " + std::to_string(d.node));
        if (d.s_rating <= 0.0)
            throw FeederError("DER at node " + std::to_string(d.node) + " has nonpositive rating");
        if (std::abs(d.p_min) > d.s_rating)
            throw FeederError("DER at node " + std::to_string(d.node) +
                              " has p_min outside its capacity disk");
    }
    for (int m : monitored) check_node(m, "monitored");
    for (const auto& l : base_loads) check_node(l.node, "load");

    // connectivity over the full node set including slack
    std::vector<std::vector<int>> adj(node_count);
    for (const auto& e : edges) {
        adj[e.from].push_back(e.to);
        adj[e.to].push_back(e.from);
    }
    std::vector<char> seen(node_count, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                stack.push_back(w);
            }
    }
    for (int i = 0; i < node_count; ++i)
        if (!seen[i]) throw FeederError("node " + std::to_string(i) + " unreachable from slack");
}

namespace {

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw FeederError(name + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

FeederModel parse_feeder_text(std::istream& in, const std::string& name) {
    FeederModel f;
    std::string line;
    int lineno = 0;
    bool nodes_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        auto need = [&](auto&... vals) {
            if (!((ls >> vals) && ...)) fail(name, lineno, "malformed '" + kw + "' record");
        };
        if (kw == "base") {
            need(f.base_mva, f.base_kv);
        } else if (kw == "slack") {
            double re, im;
            need(re, im);
            f.slack_voltage = {re, im};
        } else if (kw == "nodes") {
            int nn;
            need(nn);
            if (nn < 1) fail(name, lineno, "node count must be positive");
            f.node_count = nn + 1;
            nodes_seen = true;
        } else if (kw == "edge") {
            Edge e;
            double r, x, bsh;
            need(e.from, e.to, r, x, bsh);
            e.z = {r, x};
            e.y_shunt = {0.0, bsh};
            f.edges.push_back(e);
        } else if (kw == "load") {
            BaseLoad l;
            need(l.node, l.p, l.q);
            f.base_loads.push_back(l);
        } else if (kw == "der") {
            DerSpec d;
            need(d.node, d.p_min, d.s_rating);
            f.ders.push_back(d);
        } else if (kw == "monitor") {
            std::string tok;
            while (ls >> tok) {
                if (tok == "all") {
                    if (!nodes_seen) fail(name, lineno, "'monitor all' before 'nodes'");
                    f.monitored.clear();
                    for (int i = 1; i <= f.n(); ++i) f.monitored.push_back(i);
                    break;
                }
                try {
                    f.monitored.push_back(std::stoi(tok));
                } catch (const std::exception&) {
                    fail(name, lineno, "bad monitored node '" + tok + "'");
                }
            }
        } else {
            fail(name, lineno, "unknown record '" + kw + "'");
        }
    }
    if (!nodes_seen) throw FeederError(name + ": missing 'nodes' record");
    f.validate();
    return f;
}

FeederModel parse_feeder_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FeederError("cannot open feeder file '" + path + "'");
    return parse_feeder_text(in, path);
}

}  // namespace derflow
