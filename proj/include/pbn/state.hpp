#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pbn {

// Gene-expression vector of n binary values packed into an integer.
// Gene g_1 occupies bit 0, g_i occupies bit i-1. The canonical string
// rendering is g_1..g_n left to right.
struct NetworkState {
    std::uint32_t bits = 0;
    int n = 0;

    NetworkState() = default;
    NetworkState(std::uint32_t b, int num_nodes) : bits(b), n(num_nodes) {}

    bool get(int i) const { return (bits >> i) & 1u; }

    NetworkState with_bit(int i, bool v) const {
        std::uint32_t b = bits;
        if (v)
            b |= (1u << i);
        else
            b &= ~(1u << i);
        return {b, n};
    }

    NetworkState flipped(int i) const { return {bits ^ (1u << i), n}; }

    std::string to_string() const {
        std::string s(static_cast<std::size_t>(n), '0');
        for (int i = 0; i < n; ++i)
            if (get(i)) s[static_cast<std::size_t>(i)] = '1';
        return s;
    }

    static NetworkState from_string(const std::string& s) {
        if (s.empty() || s.size() > 32)
            throw std::invalid_argument("state string must have 1..32 characters");
        NetworkState st(0, static_cast<int>(s.size()));
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                st.bits |= (1u << i);
            else if (s[i] != '0')
                throw std::invalid_argument("state string must be binary: " + s);
        }
        return st;
    }

    friend bool operator==(const NetworkState& a, const NetworkState& b) {
        return a.bits == b.bits && a.n == b.n;
    }
    friend bool operator!=(const NetworkState& a, const NetworkState& b) { return !(a == b); }
    friend bool operator<(const NetworkState& a, const NetworkState& b) { return a.bits < b.bits; }
};

}  // namespace pbn
