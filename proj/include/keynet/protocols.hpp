#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "keynet/combiners.hpp"
#include "keynet/random.hpp"
#include "keynet/rate_models.hpp"
#include "keynet/topology.hpp"

namespace keynet {

// An end-to-end key route: links in order from alice to bob.
struct Channel {
    std::string id;
    std::vector<std::string> path;

    bool operator==(const Channel&) const = default;
};

enum class ProtocolKind { Series, ParallelXor, ParallelSecretSharing };

std::string_view to_string(ProtocolKind k);

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::Series;
    std::vector<Channel> channels;
    unsigned threshold = 0;  // secret sharing only
    FieldTag field = FieldTag::Gf256;  // secret sharing only

    bool operator==(const ProtocolConfig&) const = default;
};

// Violations of the channel invariants (known links, contiguous, alice to
// bob). Empty when the channel is usable.
std::vector<std::string> check_channel(const NetworkTopology& topology, const Channel& channel);

// Structural checks for a whole configuration (channel count, threshold
// bounds, per-channel checks). Throws InvalidArgument on the first problem.
void check_protocol(const NetworkTopology& topology, const ProtocolConfig& config);

// Warnings for parallel channels sharing links or relay nodes.
std::vector<std::string> shared_element_warnings(const NetworkTopology& topology, std::span<const Channel> channels);

// Per-link and per-session randomness. Each link draws from its own stream so
// runs replay exactly and no key bits are shared between links.
class KeySource {
public:
    virtual ~KeySource() = default;
    virtual ByteStream& link_stream(const std::string& link_id) = 0;
    virtual ByteStream& session_stream() = 0;
};

class SeededKeySource final : public KeySource {
public:
    explicit SeededKeySource(std::uint64_t seed);

    ByteStream& link_stream(const std::string& link_id) override;
    ByteStream& session_stream() override { return session_; }

    // Bytes drawn so far from each link stream that has been touched.
    std::map<std::string, std::size_t> link_bytes_drawn() const;

private:
    std::uint64_t seed_;
    std::map<std::string, SeededStream> links_;
    SeededStream session_;
};

enum class MessageKind { RelayXor, ShareCiphertext };

struct TranscriptMessage {
    std::string sender;   // node id
    std::string channel;  // channel id the message belongs to
    MessageKind kind = MessageKind::RelayXor;
    std::vector<std::uint8_t> payload;

    bool operator==(const TranscriptMessage&) const = default;
};

// Secret per-channel record kept for analysis: the segment keys established
// along the channel path.
struct ChannelRecord {
    std::string channel;
    bool delivered = false;
    std::string failure;  // abort reason when not delivered
    std::vector<KeyMaterial> segment_keys;

    bool operator==(const ChannelRecord&) const = default;
};

struct SessionResult {
    KeyMaterial alice_key;
    KeyMaterial bob_key;
    std::vector<TranscriptMessage> transcript;
    std::vector<ChannelRecord> channels;
    std::map<std::string, std::size_t> link_bytes_drawn;
    double elapsed_model_time = 0.0;

    bool keys_match() const { return alice_key.same_bits(bob_key); }
    std::size_t transcript_bytes() const;
    bool operator==(const SessionResult&) const = default;
};

struct LinkKey {
    KeyMaterial key;  // held identically by both endpoints
    double elapsed_s;
};

// Pairwise symmetric key over one QKD or KEM link. Throws ProtocolAbort when
// the link rate is zero.
LinkKey establish_link_key(const Link& link, double rate_bps, std::size_t length_bits, KeySource& source);

// Trusted-relay chain: the final key is the first segment key; every interior
// node publishes the XOR of its two segment keys and bob unwinds the chain.
SessionResult run_series_relay(const NetworkTopology& topology, const Channel& channel, std::size_t length_bits,
                               const RateAssignment& rates, KeySource& source);

// XOR of independent end-to-end channel keys; every channel must succeed.
SessionResult run_parallel_xor(const NetworkTopology& topology, std::span<const Channel> channels,
                               std::size_t length_bits, const RateAssignment& rates, KeySource& source);

// Alice shares a fresh key t-of-n and sends share j one-time-padded over
// channel j. Up to n - t dead channels are tolerated.
SessionResult run_parallel_secret_sharing(const NetworkTopology& topology, std::span<const Channel> channels,
                                          unsigned threshold, std::size_t length_bits, const RateAssignment& rates,
                                          KeySource& source, FieldTag field = FieldTag::Gf256);

SessionResult run_protocol(const NetworkTopology& topology, const ProtocolConfig& config, std::size_t length_bits,
                           const RateAssignment& rates, KeySource& source);

// What an eavesdropper holding the keys of `compromised` elements (links, or
// relay nodes and therefore their incident segment keys) can compute from the
// public transcript. Returns the final key when it is derivable.
std::optional<KeyMaterial> recover_final_key(const NetworkTopology& topology, const ProtocolConfig& config,
                                             const SessionResult& session, const std::set<std::string>& compromised);

}  // namespace keynet
