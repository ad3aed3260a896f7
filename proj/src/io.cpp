#include "fairdag/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fairdag {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string instance_hash(const Instance& inst) { return sha256_hex(serialize_instance(inst)); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string trace_csv(const ScheduleTrace& trace) {
    std::ostringstream out;
    out << "segment_start,segment_end,job_id,rate,segment_start_exact,segment_end_exact,rate_exact\n";
    for (const auto& seg : trace.segments) {
        const std::string bounds = format_float(to_double(seg.start)) + "," + format_float(to_double(seg.end));
        const std::string exact = to_fraction_string(seg.start) + "," + to_fraction_string(seg.end);
        if (seg.rates.empty()) out << bounds << ",,0," << exact << ",0/1\n";
        for (const auto& [id, rate] : seg.rates) {
            out << bounds << "," << id << "," << format_float(to_double(rate)) << "," << exact << ","
                << to_fraction_string(rate) << "\n";
        }
    }
    return out.str();
}

std::string completions_csv(const ScheduleTrace& trace) {
    std::ostringstream out;
    out << "job_id,start_time,completion,start_time_exact,completion_exact\n";
    for (const auto& [id, c] : trace.completions) {
        auto st = trace.start_times.find(id);
        const Rational start = st == trace.start_times.end() ? c : st->second;
        out << id << "," << format_float(to_double(start)) << "," << format_float(to_double(c)) << ","
            << to_fraction_string(start) << "," << to_fraction_string(c) << "\n";
    }
    return out.str();
}

}  // namespace fairdag
