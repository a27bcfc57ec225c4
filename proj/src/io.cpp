#include "maccanon/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace maccanon {

namespace {

using nlohmann::json;

void fmt(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

void write_complex_matrix(std::string& out, const cmat& m) {
    out += '[';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += ',';
        out += '[';
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += '[';
            fmt(out, m(i, j).real());
            out += ',';
            fmt(out, m(i, j).imag());
            out += ']';
        }
        out += ']';
    }
    out += ']';
}

void write_real_vector(std::string& out, const rvec& v) {
    out += '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        fmt(out, v(i));
    }
    out += ']';
}

void write_header(std::string& out, const ChannelSet& ch) {
    out += "\"version\":1,\"c_b\":" + std::to_string(ch.cb);
    out += ",\"U\":" + std::to_string(ch.num_users);
    out += ",\"L_y\":" + std::to_string(ch.rx_antennas);
    out += ",\"L_x\":[";
    for (int u = 0; u < ch.num_users; ++u) {
        if (u) out += ',';
        out += std::to_string(ch.tx_antennas[static_cast<size_t>(u)]);
    }
    out += "],\"N\":" + std::to_string(ch.num_tones);
}

void write_tone_user_matrices(std::string& out, const std::vector<std::vector<cmat>>& m) {
    out += '[';
    for (size_t n = 0; n < m.size(); ++n) {
        if (n) out += ',';
        out += '[';
        for (size_t u = 0; u < m[n].size(); ++u) {
            if (u) out += ',';
            write_complex_matrix(out, m[n][u]);
        }
        out += ']';
    }
    out += ']';
}

cmat parse_complex_matrix(const json& j, int rows, int cols, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw ParseError("row count mismatch" + where);
    cmat m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ParseError("column count mismatch" + where);
        for (int c = 0; c < cols; ++c) {
            const json& e = row[static_cast<size_t>(c)];
            if (!e.is_array() || e.size() != 2)
                throw ParseError("complex entry must be [re, im]" + where);
            m(i, c) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    }
    return m;
}

rvec parse_real_vector(const json& j) {
    rvec v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

struct Dims {
    int users, ly, tones, cb;
    std::vector<int> lx;
};

Dims parse_header(const json& j) {
    Dims d{};
    for (const char* key : {"c_b", "U", "L_y", "L_x", "N"})
        if (!j.contains(key)) throw ParseError(std::string("missing field \"") + key + "\"");
    d.cb = j["c_b"].get<int>();
    if (d.cb != 1 && d.cb != 2) throw ParseError("field \"c_b\" must be 1 or 2");
    d.users = j["U"].get<int>();
    d.ly = j["L_y"].get<int>();
    d.tones = j["N"].get<int>();
    d.lx = j["L_x"].get<std::vector<int>>();
    return d;
}

std::vector<std::vector<cmat>> parse_tone_user(const json& j, const Dims& d, int rows_ly,
                                               const std::string& name) {
    if (!j.is_array() || static_cast<int>(j.size()) != d.tones)
        throw ParseError("field \"" + name + "\": tone count mismatch");
    std::vector<std::vector<cmat>> out(static_cast<size_t>(d.tones));
    for (int n = 0; n < d.tones; ++n) {
        const json& tone = j[static_cast<size_t>(n)];
        if (!tone.is_array() || static_cast<int>(tone.size()) != d.users)
            throw ParseError("field \"" + name + "\": user count mismatch at tone " +
                             std::to_string(n));
        for (int u = 0; u < d.users; ++u) {
            std::ostringstream where;
            where << " in \"" << name << "\" at (tone " << n << ", user " << u << ")";
            int lx = d.lx[static_cast<size_t>(u)];
            int rows = rows_ly > 0 ? rows_ly : lx;
            out[static_cast<size_t>(n)].push_back(
                parse_complex_matrix(tone[static_cast<size_t>(u)], rows, lx, where.str()));
        }
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << text;
}

}  // namespace

std::string channel_to_json(const ChannelSet& ch) {
    ch.validate();
    std::string out = "{";
    write_header(out, ch);
    out += ",\"H\":";
    write_tone_user_matrices(out, ch.H);
    out += "}\n";
    return out;
}

ChannelSet channel_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("channel file: ") + e.what());
    }
    Dims d = parse_header(j);
    if (!j.contains("H")) throw ParseError("missing field \"H\"");
    ChannelSet ch;
    ch.num_users = d.users;
    ch.rx_antennas = d.ly;
    ch.tx_antennas = d.lx;
    ch.num_tones = d.tones;
    ch.cb = d.cb;
    ch.H = parse_tone_user(j["H"], d, d.ly, "H");
    try {
        ch.validate();
    } catch (const ValidationError& e) {
        throw ParseError(std::string("channel file: ") + e.what());
    }
    return ch;
}

std::string report_to_json(const ChannelSet& ch, const SolveReport& rep) {
    std::string out = "{";
    write_header(out, ch);
    out += ",\"flag\":" + std::to_string(rep.flag);
    out += ",\"objective\":";
    fmt(out, rep.objective);
    out += ",\"outer_iterations\":" + std::to_string(rep.outer_iterations);
    out += ",\"theta\":";
    write_real_vector(out, rep.theta);
    out += ",\"w\":";
    write_real_vector(out, rep.w);
    out += ",\"alpha\":";
    write_real_vector(out, rep.alpha);
    out += ",\"energies\":";
    write_real_vector(out, rep.energies);
    out += ",\"orders\":[";
    for (size_t k = 0; k < rep.rates.size(); ++k) {
        if (k) out += ',';
        out += '[';
        for (size_t i = 0; i < rep.rates[k].order.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(rep.rates[k].order[i] + 1);  // 1-based in files
        }
        out += ']';
    }
    out += "],\"b\":[";
    for (size_t k = 0; k < rep.rates.size(); ++k) {
        if (k) out += ',';
        out += '[';
        const rmat& b = rep.rates[k].b;
        for (Eigen::Index n = 0; n < b.rows(); ++n) {
            if (n) out += ',';
            write_real_vector(out, b.row(n).transpose());
        }
        out += ']';
    }
    out += "],\"b_totals\":[";
    for (size_t k = 0; k < rep.rates.size(); ++k) {
        if (k) out += ',';
        write_real_vector(out, rep.rates[k].totals);
    }
    out += "],\"trace\":[";
    for (size_t i = 0; i < rep.trace.size(); ++i) {
        if (i) out += ',';
        fmt(out, rep.trace[i]);
    }
    out += "],\"R\":";
    write_tone_user_matrices(out, rep.plan.R);
    out += "}\n";
    return out;
}

SolveReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("report file: ") + e.what());
    }
    Dims d = parse_header(j);
    SolveReport rep;
    rep.flag = j.at("flag").get<int>();
    if (rep.flag < 0 || rep.flag > 2) throw ParseError("field \"flag\" must be 0, 1, or 2");
    rep.objective = j.value("objective", 0.0);
    rep.outer_iterations = j.value("outer_iterations", 0);
    rep.theta = parse_real_vector(j.at("theta"));
    rep.w = parse_real_vector(j.at("w"));
    rep.alpha = parse_real_vector(j.at("alpha"));
    rep.energies = parse_real_vector(j.at("energies"));
    for (const auto& t : j.at("trace")) rep.trace.push_back(t.get<double>());
    rep.plan.R = parse_tone_user(j.at("R"), d, 0, "R");

    const json& orders = j.at("orders");
    const json& b = j.at("b");
    const json& totals = j.at("b_totals");
    if (orders.size() != b.size() || orders.size() != totals.size())
        throw ParseError("orders/b/b_totals length mismatch");
    for (size_t k = 0; k < orders.size(); ++k) {
        RateAllocation ra;
        for (const auto& o : orders[k]) ra.order.push_back(o.get<int>() - 1);
        ra.b.resize(d.tones, d.users);
        if (static_cast<int>(b[k].size()) != d.tones)
            throw ParseError("field \"b\": tone count mismatch");
        for (int n = 0; n < d.tones; ++n)
            ra.b.row(n) = parse_real_vector(b[k][static_cast<size_t>(n)]).transpose();
        ra.totals = parse_real_vector(totals[k]);
        rep.rates.push_back(std::move(ra));
    }
    return rep;
}

void save_channel(const std::string& path, const ChannelSet& ch) {
    write_file(path, channel_to_json(ch));
}

ChannelSet load_channel(const std::string& path) {
    return channel_from_json(read_file(path));
}

void save_report(const std::string& path, const ChannelSet& ch, const SolveReport& rep) {
    write_file(path, report_to_json(ch, rep));
}

SolveReport load_report(const std::string& path) {
    return report_from_json(read_file(path));
}

}  // namespace maccanon
