#include "keynet/protocols.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "keynet/error.hpp"
#include "keynet/kernels/byte_kernels.hpp"

namespace keynet {

std::string_view to_string(ProtocolKind k) {
    switch (k) {
        case ProtocolKind::Series:
            return "series";
        case ProtocolKind::ParallelXor:
            return "parallel_xor";
        case ProtocolKind::ParallelSecretSharing:
            return "parallel_secret_sharing";
    }
    return "unknown";
}

std::vector<std::string> check_channel(const NetworkTopology& topology, const Channel& channel) {
    std::vector<std::string> out;
    if (channel.path.empty()) {
        out.push_back(fmt::format("channel {}: empty path", channel.id));
        return out;
    }
    try {
        const auto nodes = walk_path(topology, topology.alice(), channel.path);
        if (nodes.back() != topology.bob())
            out.push_back(fmt::format("channel {}: path ends at {}, not bob", channel.id, nodes.back()));
    } catch (const InvalidArgument& e) {
        out.push_back(fmt::format("channel {}: {}", channel.id, e.what()));
    }
    return out;
}

void check_protocol(const NetworkTopology& topology, const ProtocolConfig& config) {
    const std::size_t n = config.channels.size();
    switch (config.kind) {
        case ProtocolKind::Series:
            if (n != 1) throw InvalidArgument(fmt::format("series protocol needs exactly one channel, got {}", n));
            break;
        case ProtocolKind::ParallelXor:
            if (n < 2) throw InvalidArgument(fmt::format("parallel_xor needs at least two channels, got {}", n));
            break;
        case ProtocolKind::ParallelSecretSharing:
            if (config.threshold < 1 || config.threshold > n)
                throw InvalidArgument(
                    fmt::format("secret sharing needs 1 <= t <= n (t={}, n={})", config.threshold, n));
            if (n > field_order(config.field) - 1)
                throw InvalidArgument(fmt::format("{} channels exceed the share field size", n));
            break;
    }
    std::set<std::string> ids;
    for (const Channel& c : config.channels) {
        if (!ids.insert(c.id).second) throw InvalidArgument(fmt::format("duplicate channel id {}", c.id));
        if (auto v = check_channel(topology, c); !v.empty()) throw InvalidArgument(v.front());
    }
}

std::vector<std::string> shared_element_warnings(const NetworkTopology& topology, std::span<const Channel> channels) {
    std::map<std::string, std::vector<std::string>> users;
    for (const Channel& c : channels) {
        std::set<std::string> elements(c.path.begin(), c.path.end());
        try {
            const auto nodes = walk_path(topology, topology.alice(), c.path);
            for (std::size_t i = 1; i + 1 < nodes.size(); ++i) elements.insert(nodes[i]);
        } catch (const InvalidArgument&) {
        }
        for (const auto& e : elements) users[e].push_back(c.id);
    }
    std::vector<std::string> out;
    for (const auto& [element, chans] : users) {
        if (chans.size() < 2) continue;
        std::string joined;
        for (const auto& c : chans) joined += (joined.empty() ? "" : ", ") + c;
        out.push_back(fmt::format("channels {} share element {}", joined, element));
    }
    return out;
}

SeededKeySource::SeededKeySource(std::uint64_t seed)
    : seed_(seed), session_(SeededStream::derive(seed, "session")) {}

ByteStream& SeededKeySource::link_stream(const std::string& link_id) {
    auto it = links_.find(link_id);
    if (it == links_.end()) it = links_.emplace(link_id, SeededStream::derive(seed_, "link:" + link_id)).first;
    return it->second;
}

std::map<std::string, std::size_t> SeededKeySource::link_bytes_drawn() const {
    std::map<std::string, std::size_t> out;
    for (const auto& [id, s] : links_) out[id] = s.bytes_drawn();
    return out;
}

std::size_t SessionResult::transcript_bytes() const {
    std::size_t n = 0;
    for (const auto& m : transcript) n += m.payload.size();
    return n;
}

namespace {

std::size_t checked_bytes(std::size_t length_bits) {
    if (length_bits == 0 || length_bits % 8 != 0)
        throw InvalidArgument(fmt::format("key length must be a positive multiple of 8 bits, got {}", length_bits));
    return length_bits / 8;
}

double rate_of(const RateAssignment& rates, const std::string& link_id) {
    auto it = rates.find(link_id);
    if (it == rates.end()) throw InvalidArgument(fmt::format("no rate parameters for link {}", link_id));
    return link_rate(it->second);
}

// First dead link on the channel, if any.
std::optional<std::string> dead_link(const Channel& channel, const RateAssignment& rates) {
    for (const auto& id : channel.path)
        if (!(rate_of(rates, id) > 0.0)) return id;
    return std::nullopt;
}

struct ChannelOutcome {
    KeyMaterial alice_side;
    KeyMaterial bob_side;
    double elapsed_s;
    ChannelRecord record;
};

// Runs the relay chain for one channel, appending relay messages to the
// transcript. Each node only touches the keys it holds.
ChannelOutcome run_channel(const NetworkTopology& topology, const Channel& channel, std::size_t length_bits,
                           const RateAssignment& rates, KeySource& source,
                           std::vector<TranscriptMessage>& transcript,
                           std::map<std::string, std::size_t>& drawn) {
    if (auto v = check_channel(topology, channel); !v.empty()) throw InvalidArgument(v.front());
    if (auto dead = dead_link(channel, rates))
        throw ProtocolAbort(*dead, fmt::format("link {} dead at this distance", *dead));

    const auto nodes = walk_path(topology, topology.alice(), channel.path);
    const std::size_t m = channel.path.size();

    std::vector<KeyMaterial> segment;
    segment.reserve(m);
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& id : channel.path) {
        const double rate = rate_of(rates, id);
        auto lk = establish_link_key(topology.link(id), rate, length_bits, source);
        drawn[id] += lk.key.size();
        slowest = std::min(slowest, rate);
        segment.push_back(std::move(lk.key));
    }

    // Interior node i holds segment[i-1] (towards alice) and segment[i].
    for (std::size_t i = 1; i < m; ++i) {
        std::vector<std::uint8_t> c = segment[i - 1].bytes();
        kernels::xor_into(c, segment[i].bytes());
        transcript.push_back({nodes[i], channel.id, MessageKind::RelayXor, std::move(c)});
    }

    const std::string origin = "channel:" + channel.id;
    KeyMaterial alice_side(segment.front().bytes(), origin);

    // Bob: k_m XOR every relay message published for this channel.
    std::vector<std::uint8_t> bob = segment.back().bytes();
    for (const auto& msg : transcript)
        if (msg.channel == channel.id && msg.kind == MessageKind::RelayXor) kernels::xor_into(bob, msg.payload);
    KeyMaterial bob_side(std::move(bob), origin);

    ChannelRecord record{channel.id, true, {}, std::move(segment)};
    return {std::move(alice_side), std::move(bob_side), static_cast<double>(length_bits) / slowest, std::move(record)};
}

}  // namespace

LinkKey establish_link_key(const Link& link, double rate_bps, std::size_t length_bits, KeySource& source) {
    const std::size_t bytes = checked_bytes(length_bits);
    if (!(rate_bps > 0.0)) throw ProtocolAbort(link.id, fmt::format("link {} dead at this distance", link.id));
    std::vector<std::uint8_t> key(bytes);
    source.link_stream(link.id).fill(key);
    return {KeyMaterial(std::move(key), "link:" + link.id), static_cast<double>(length_bits) / rate_bps};
}

SessionResult run_series_relay(const NetworkTopology& topology, const Channel& channel, std::size_t length_bits,
                               const RateAssignment& rates, KeySource& source) {
    checked_bytes(length_bits);
    std::vector<TranscriptMessage> transcript;
    std::map<std::string, std::size_t> drawn;
    auto out = run_channel(topology, channel, length_bits, rates, source, transcript, drawn);
    const std::string origin = "series:" + channel.id;
    return SessionResult{KeyMaterial(out.alice_side.bytes(), origin),
                         KeyMaterial(out.bob_side.bytes(), origin),
                         std::move(transcript),
                         {std::move(out.record)},
                         std::move(drawn),
                         out.elapsed_s};
}

SessionResult run_parallel_xor(const NetworkTopology& topology, std::span<const Channel> channels,
                               std::size_t length_bits, const RateAssignment& rates, KeySource& source) {
    checked_bytes(length_bits);
    if (channels.size() < 2)
        throw InvalidArgument(fmt::format("parallel_xor needs at least two channels, got {}", channels.size()));
    // The scheme needs every channel; refuse before drawing any key bits.
    for (const Channel& c : channels) {
        if (auto v = check_channel(topology, c); !v.empty()) throw InvalidArgument(v.front());
        if (auto dead = dead_link(c, rates))
            throw ProtocolAbort(c.id, fmt::format("channel {} failed: link {} dead at this distance", c.id, *dead));
    }

    std::vector<TranscriptMessage> transcript;
    std::map<std::string, std::size_t> drawn;
    std::vector<KeyMaterial> alice_parts, bob_parts;
    std::vector<ChannelRecord> records;
    double elapsed = 0.0;
    for (const Channel& c : channels) {
        auto out = run_channel(topology, c, length_bits, rates, source, transcript, drawn);
        alice_parts.push_back(std::move(out.alice_side));
        bob_parts.push_back(std::move(out.bob_side));
        records.push_back(std::move(out.record));
        elapsed = std::max(elapsed, out.elapsed_s);
    }
    return SessionResult{xor_combine(alice_parts), xor_combine(bob_parts), std::move(transcript),
                         std::move(records),       std::move(drawn),       elapsed};
}

SessionResult run_parallel_secret_sharing(const NetworkTopology& topology, std::span<const Channel> channels,
                                          unsigned threshold, std::size_t length_bits, const RateAssignment& rates,
                                          KeySource& source, FieldTag field) {
    const std::size_t bytes = checked_bytes(length_bits);
    const std::size_t n = channels.size();
    if (threshold < 1 || threshold > n)
        throw InvalidArgument(fmt::format("secret sharing needs 1 <= t <= n (t={}, n={})", threshold, n));

    std::vector<std::optional<std::string>> dead(n);
    std::size_t live = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (auto v = check_channel(topology, channels[j]); !v.empty()) throw InvalidArgument(v.front());
        dead[j] = dead_link(channels[j], rates);
        if (!dead[j]) ++live;
    }
    if (live < threshold)
        throw ProtocolAbort("", fmt::format("fewer than t live channels ({} live, t={})", live, threshold));

    // Alice's side: fresh key, shares, one pad per share (header included).
    KeyMaterial secret(sample_symbols(field, bytes, source.session_stream()), "secret-sharing");
    const auto shares = share_secret(secret, threshold, static_cast<unsigned>(n), source.session_stream(), field);
    const std::size_t pad_bits = 8 * (kShareHeaderBytes + bytes);

    std::vector<TranscriptMessage> transcript;
    std::map<std::string, std::size_t> drawn;
    std::vector<ChannelRecord> records;
    std::vector<std::pair<std::size_t, KeyMaterial>> bob_pads;
    double elapsed = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (dead[j]) {
            records.push_back({channels[j].id, false, fmt::format("link {} dead at this distance", *dead[j]), {}});
            continue;
        }
        auto out = run_channel(topology, channels[j], pad_bits, rates, source, transcript, drawn);
        std::vector<std::uint8_t> wire = encode_share(shares[j]);
        kernels::xor_into(wire, out.alice_side.bytes());
        transcript.push_back({topology.alice(), channels[j].id, MessageKind::ShareCiphertext, std::move(wire)});
        bob_pads.emplace_back(j, std::move(out.bob_side));
        records.push_back(std::move(out.record));
        elapsed = std::max(elapsed, out.elapsed_s);
    }

    // Bob's side: decrypt what arrived, reconstruct from the first t.
    std::vector<SecretShare> received;
    for (const auto& [j, pad] : bob_pads) {
        for (const auto& msg : transcript) {
            if (msg.channel != channels[j].id || msg.kind != MessageKind::ShareCiphertext) continue;
            std::vector<std::uint8_t> wire = msg.payload;
            kernels::xor_into(wire, pad.bytes());
            received.push_back(decode_share(wire));
        }
    }
    KeyMaterial bob_key = reconstruct(received, "secret-sharing");
    return SessionResult{std::move(secret),  std::move(bob_key), std::move(transcript),
                         std::move(records), std::move(drawn),   elapsed};
}

SessionResult run_protocol(const NetworkTopology& topology, const ProtocolConfig& config, std::size_t length_bits,
                           const RateAssignment& rates, KeySource& source) {
    check_protocol(topology, config);
    switch (config.kind) {
        case ProtocolKind::Series:
            return run_series_relay(topology, config.channels.front(), length_bits, rates, source);
        case ProtocolKind::ParallelXor:
            return run_parallel_xor(topology, config.channels, length_bits, rates, source);
        case ProtocolKind::ParallelSecretSharing:
            return run_parallel_secret_sharing(topology, config.channels, config.threshold, length_bits, rates,
                                               source, config.field);
    }
    throw InvalidArgument("unknown protocol kind");
}

namespace {

// Channel key (first segment key) if any segment key of the channel is
// exposed by the compromise set.
std::optional<std::vector<std::uint8_t>> exposed_channel_key(const NetworkTopology& topology, const Channel& channel,
                                                             const ChannelRecord& record,
                                                             const std::vector<TranscriptMessage>& transcript,
                                                             const std::set<std::string>& compromised) {
    if (!record.delivered) return std::nullopt;
    const auto nodes = walk_path(topology, topology.alice(), channel.path);
    auto node_exposed = [&](const std::string& node) {
        return node != topology.alice() && node != topology.bob() && compromised.count(node) > 0;
    };
    std::optional<std::size_t> known;
    for (std::size_t j = 0; j < channel.path.size() && !known; ++j) {
        if (compromised.count(channel.path[j]) || node_exposed(nodes[j]) || node_exposed(nodes[j + 1])) known = j;
    }
    if (!known) return std::nullopt;

    // k_1 = k_j XOR c_1 XOR ... XOR c_{j-1}, the relay messages in path order.
    std::vector<std::uint8_t> key = record.segment_keys[*known].bytes();
    std::size_t relay = 0;
    for (const auto& msg : transcript) {
        if (msg.channel != channel.id || msg.kind != MessageKind::RelayXor) continue;
        if (relay++ >= *known) break;
        kernels::xor_into(key, msg.payload);
    }
    return key;
}

}  // namespace

std::optional<KeyMaterial> recover_final_key(const NetworkTopology& topology, const ProtocolConfig& config,
                                             const SessionResult& session, const std::set<std::string>& compromised) {
    std::vector<std::optional<std::vector<std::uint8_t>>> keys;
    for (const Channel& c : config.channels) {
        auto rec = std::find_if(session.channels.begin(), session.channels.end(),
                                [&](const ChannelRecord& r) { return r.channel == c.id; });
        if (rec == session.channels.end()) throw InvalidArgument(fmt::format("session has no channel {}", c.id));
        keys.push_back(exposed_channel_key(topology, c, *rec, session.transcript, compromised));
    }

    const std::string origin = "adversary";
    switch (config.kind) {
        case ProtocolKind::Series:
            if (keys.front()) return KeyMaterial(*keys.front(), origin);
            return std::nullopt;
        case ProtocolKind::ParallelXor: {
            std::vector<KeyMaterial> parts;
            for (auto& k : keys) {
                if (!k) return std::nullopt;
                parts.emplace_back(*k, origin);
            }
            return KeyMaterial(xor_combine(parts).bytes(), origin);
        }
        case ProtocolKind::ParallelSecretSharing: {
            std::vector<SecretShare> shares;
            for (std::size_t j = 0; j < config.channels.size(); ++j) {
                if (!keys[j]) continue;
                for (const auto& msg : session.transcript) {
                    if (msg.channel != config.channels[j].id || msg.kind != MessageKind::ShareCiphertext) continue;
                    std::vector<std::uint8_t> wire = msg.payload;
                    kernels::xor_into(wire, *keys[j]);
                    shares.push_back(decode_share(wire));
                }
            }
            if (shares.size() < config.threshold) return std::nullopt;
            return reconstruct(shares, origin);
        }
    }
    return std::nullopt;
}

}  // namespace keynet
