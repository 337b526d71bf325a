#include "dsbm/io.hpp"

#include <fstream>
#include <sstream>

namespace dsbm {

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return is;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

}  // namespace

void write_network(std::ostream& os, const TemporalNetwork& network) {
    os << "dsbm 1 " << network.n_nodes << ' ' << network.n_snapshots() << '\n';
    for (int t = 0; t < network.n_snapshots(); ++t) {
        const auto& snap = network.snapshots[static_cast<std::size_t>(t)];
        os << "# t " << t << ' ' << snap.size() << '\n';
        for (const auto& [i, j] : snap) os << i << ' ' << j << '\n';
    }
}

void write_network_file(const std::string& path, const TemporalNetwork& network) {
    auto os = open_out(path);
    write_network(os, network);
}

TemporalNetwork read_network(std::istream& is) {
    std::string magic;
    int version = 0, n = 0, snaps = 0;
    if (!(is >> magic >> version >> n >> snaps) || magic != "dsbm" || version != 1)
        throw std::runtime_error("bad network header (expected 'dsbm 1 <N> <T+1>')");
    if (n <= 0 || snaps <= 0) throw std::runtime_error("bad network dimensions");

    TemporalNetwork network;
    network.n_nodes = n;
    network.snapshots.resize(static_cast<std::size_t>(snaps));
    for (int t = 0; t < snaps; ++t) {
        std::string hash, tee;
        int index = 0;
        std::size_t count = 0;
        if (!(is >> hash >> tee >> index >> count) || hash != "#" || tee != "t" || index != t)
            throw std::runtime_error("bad snapshot header at t=" + std::to_string(t));
        auto& snap = network.snapshots[static_cast<std::size_t>(t)];
        snap.resize(count);
        for (std::size_t e = 0; e < count; ++e) {
            int i = 0, j = 0;
            if (!(is >> i >> j)) throw std::runtime_error("truncated edge list");
            snap[e] = {i, j};
        }
    }
    network.validate();
    return network;
}

TemporalNetwork read_network_file(const std::string& path) {
    auto is = open_in(path);
    return read_network(is);
}

void write_assignments(std::ostream& os, const AssignmentSequence& seq) {
    os << "t,node,group\n";
    for (int t = 0; t < seq.n_snapshots(); ++t) {
        const auto& row = seq.labels[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < row.size(); ++i)
            os << t << ',' << i << ',' << row[i] << '\n';
    }
}

void write_assignments_file(const std::string& path, const AssignmentSequence& seq) {
    auto os = open_out(path);
    write_assignments(os, seq);
}

AssignmentSequence read_assignments(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "t,node,group")
        throw std::runtime_error("bad assignment header (expected 't,node,group')");
    AssignmentSequence seq;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        int t = 0, node = 0, group = 0;
        char c1 = 0, c2 = 0;
        if (!(ss >> t >> c1 >> node >> c2 >> group) || c1 != ',' || c2 != ',')
            throw std::runtime_error("bad assignment line: " + line);
        if (t < 0 || node < 0 || group < 0) throw std::runtime_error("negative assignment field");
        if (t >= seq.n_snapshots()) seq.labels.resize(static_cast<std::size_t>(t) + 1);
        auto& row = seq.labels[static_cast<std::size_t>(t)];
        if (node >= static_cast<int>(row.size())) row.resize(static_cast<std::size_t>(node) + 1, -1);
        row[static_cast<std::size_t>(node)] = group;
    }
    for (const auto& row : seq.labels)
        for (int g : row)
            if (g < 0) throw std::runtime_error("assignment file has gaps");
    return seq;
}

AssignmentSequence read_assignments_file(const std::string& path) {
    auto is = open_in(path);
    return read_assignments(is);
}

void write_params_file(const std::string& path, const std::map<std::string, std::string>& kv) {
    auto os = open_out(path);
    for (const auto& [key, value] : kv) os << key << '=' << value << '\n';
}

std::map<std::string, std::string> read_params_file(const std::string& path) {
    auto is = open_in(path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') continue;
        auto pos = line.find('=');
        if (pos == std::string::npos) throw std::runtime_error("bad key=value line: " + line);
        kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    return kv;
}

}  // namespace dsbm
