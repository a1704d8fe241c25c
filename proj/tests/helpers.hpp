#ifndef PRIME_TESTS_HELPERS_HPP
#define PRIME_TESTS_HELPERS_HPP

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prime/dram_stage.hpp"
#include "prime/export_router.hpp"
#include "prime/flow.hpp"

namespace prime::testing {

// Unique scratch file under the system temp dir; removed on destruction.
class TempFile {
  public:
    explicit TempFile(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = (std::filesystem::temp_directory_path() /
                 ("primeflow_" + tag + "_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++)))
                    .string();
    }
    ~TempFile() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    TempFile(const TempFile&) = delete;
    TempFile& operator=(const TempFile&) = delete;

    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace pcap {

inline void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u16be(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
}

inline void put_u32be(std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::string global_header(std::uint32_t linktype = 1) {
    std::string out;
    put_u32le(out, 0xA1B2C3D4u);  // classic magic, little-endian file
    put_u16le(out, 2);            // version 2.4
    put_u16le(out, 4);
    put_u32le(out, 0);      // thiszone
    put_u32le(out, 0);      // sigfigs
    put_u32le(out, 65535);  // snaplen
    put_u32le(out, linktype);
    return out;
}

// Ethernet + IPv4 + minimal L4 frame carrying the given flow key.
inline std::string frame_for(const FlowKey& key) {
    std::string f;
    f.append(12, '\0');      // MACs
    put_u16be(f, 0x0800);    // IPv4
    f.push_back(0x45);       // version 4, ihl 5
    f.push_back(0);          // tos
    put_u16be(f, 20 + 8);    // total length (unchecked by the reader)
    put_u16be(f, 0);         // id
    put_u16be(f, 0);         // flags + fragment offset
    f.push_back(64);         // ttl
    f.push_back(static_cast<char>(key.protocol));
    put_u16be(f, 0);  // checksum (unchecked)
    put_u32be(f, key.src_ip);
    put_u32be(f, key.dst_ip);
    put_u16be(f, key.src_port);
    put_u16be(f, key.dst_port);
    f.append(4, '\0');  // rest of a minimal L4 header
    return f;
}

// Something the reader must skip: an ARP frame.
inline std::string arp_frame() {
    std::string f;
    f.append(12, '\0');
    put_u16be(f, 0x0806);  // ARP
    f.append(28, '\0');
    return f;
}

inline void append_packet(std::string& out, Timestamp ts_us, const std::string& frame) {
    put_u32le(out, static_cast<std::uint32_t>(ts_us / 1'000'000));
    put_u32le(out, static_cast<std::uint32_t>(ts_us % 1'000'000));
    put_u32le(out, static_cast<std::uint32_t>(frame.size()));
    put_u32le(out, static_cast<std::uint32_t>(frame.size()));
    out += frame;
}

inline void write_capture(const std::string& path,
                          const std::vector<PacketRecord>& packets) {
    std::string out = global_header();
    for (const PacketRecord& p : packets) append_packet(out, p.ts, frame_for(p.key));
    write_file(path, out);
}

}  // namespace pcap

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs the packaged binary with the given argument string, capturing both
// streams. Arguments must already be shell-quoted where needed.
inline CliResult run_cli(const std::string& args) {
    TempFile out_file("stdout");
    TempFile err_file("stderr");
    const std::string cmd = std::string(PRIME_CLI_BIN) + " " + args + " > " +
                            out_file.path() + " 2> " + err_file.path();
    const int rc = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = (rc == -1) ? -1 : WEXITSTATUS(rc);
    result.out = read_file(out_file.path());
    result.err = read_file(err_file.path());
    return result;
}

// Dense reference model of the slow-memory stage: a literal array of
// optional records plus an append-only list. Used to cross-check the sparse
// production implementation batch for batch.
class ReferenceDram {
  public:
    ReferenceDram(std::uint64_t slot_count, std::uint64_t seed)
        : slots_(slot_count), seed_(seed) {}

    void handle_batch(const Batch& batch) {
        if (batch.flag == BufferKind::New) {
            for (const Tfr& r : batch.records) queue_.push_back(r);
            return;
        }
        for (const Tfr& rec : batch.records) {
            auto& slot = slots_[flow_hash(rec.key, seed_) % slots_.size()];
            if (!slot) {
                slot = rec;
            } else if (slot->key == rec.key) {
                slot->count += rec.count;
                slot->ets = rec.ets;
            } else {
                queue_.push_back(*slot);
                slot = rec;
            }
        }
    }

    std::vector<Tfr> finalize() {
        std::vector<Tfr> out = std::move(queue_);
        queue_ = {};
        for (auto& slot : slots_) {
            if (slot) out.push_back(*slot);
            slot.reset();
        }
        return out;
    }

  private:
    std::vector<std::optional<Tfr>> slots_;
    std::uint64_t seed_;
    std::vector<Tfr> queue_;
};

}  // namespace prime::testing

#endif  // PRIME_TESTS_HELPERS_HPP
