#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thermstab/rng.hpp"

namespace thermstab {

enum class Gate : uint8_t { H, S, X, Y, Z, CNOT, CZ };

inline const char* gate_name(Gate g) {
    switch (g) {
        case Gate::H: return "H";
        case Gate::S: return "S";
        case Gate::X: return "X";
        case Gate::Y: return "Y";
        case Gate::Z: return "Z";
        case Gate::CNOT: return "CNOT";
        case Gate::CZ: return "CZ";
    }
    return "?";
}

/// CHP-style destabilizer/stabilizer tableau.
///
/// Rows 0..n-1 are destabilizers, rows n..2n-1 stabilizers, row 2n is scratch
/// for deterministic measurements. X and Z bits are packed per row into
/// 64-bit words so the row sums that dominate measurement cost are word-wide
/// XORs. Bits beyond qubit n-1 in the last word stay zero.
class StabilizerTableau {
   public:
    explicit StabilizerTableau(int n) : n_(n), w_((n + 63) >> 6) {
        if (n < 1) throw std::invalid_argument("StabilizerTableau: need at least one qubit");
        x_.assign((size_t)(2 * n_ + 1) * w_, 0);
        z_.assign((size_t)(2 * n_ + 1) * w_, 0);
        r_.assign(2 * n_ + 1, 0);
        reset_all_zero();
    }

    int n_qubits() const { return n_; }

    /// Reinitialize to |0...0>: destabilizers X_i, stabilizers Z_i, phases +.
    void reset_all_zero() {
        std::fill(x_.begin(), x_.end(), 0);
        std::fill(z_.begin(), z_.end(), 0);
        std::fill(r_.begin(), r_.end(), 0);
        for (int i = 0; i < n_; ++i) {
            x_[(size_t)i * w_ + (i >> 6)] |= 1ull << (i & 63);
            z_[(size_t)(n_ + i) * w_ + (i >> 6)] |= 1ull << (i & 63);
        }
    }

    void apply_h(int q) {
        check_qubit(q);
        const size_t wq = q >> 6;
        const uint64_t m = 1ull << (q & 63);
        for (int i = 0; i < 2 * n_; ++i) {
            uint64_t& xw = x_[(size_t)i * w_ + wq];
            uint64_t& zw = z_[(size_t)i * w_ + wq];
            r_[i] ^= (uint8_t)(((xw & zw) >> (q & 63)) & 1);
            uint64_t d = (xw ^ zw) & m;
            xw ^= d;
            zw ^= d;
        }
    }

    void apply_s(int q) {
        check_qubit(q);
        const size_t wq = q >> 6;
        const uint64_t m = 1ull << (q & 63);
        for (int i = 0; i < 2 * n_; ++i) {
            uint64_t& xw = x_[(size_t)i * w_ + wq];
            uint64_t& zw = z_[(size_t)i * w_ + wq];
            r_[i] ^= (uint8_t)(((xw & zw) >> (q & 63)) & 1);
            zw ^= xw & m;
        }
    }

    void apply_x(int q) {
        check_qubit(q);
        const size_t wq = q >> 6;
        const int b = q & 63;
        for (int i = 0; i < 2 * n_; ++i) {
            r_[i] ^= (uint8_t)((z_[(size_t)i * w_ + wq] >> b) & 1);
        }
    }

    void apply_y(int q) {
        check_qubit(q);
        const size_t wq = q >> 6;
        const int b = q & 63;
        for (int i = 0; i < 2 * n_; ++i) {
            uint64_t xw = x_[(size_t)i * w_ + wq];
            uint64_t zw = z_[(size_t)i * w_ + wq];
            r_[i] ^= (uint8_t)(((xw ^ zw) >> b) & 1);
        }
    }

    void apply_z(int q) {
        check_qubit(q);
        const size_t wq = q >> 6;
        const int b = q & 63;
        for (int i = 0; i < 2 * n_; ++i) {
            r_[i] ^= (uint8_t)((x_[(size_t)i * w_ + wq] >> b) & 1);
        }
    }

    void apply_cnot(int control, int target) {
        check_qubit(control);
        check_qubit(target);
        if (control == target) {
            throw std::invalid_argument("CNOT: control and target must be distinct");
        }
        const size_t wc = control >> 6, wt = target >> 6;
        const int bc = control & 63, bt = target & 63;
        const uint64_t mc = 1ull << bc, mt = 1ull << bt;
        for (int i = 0; i < 2 * n_; ++i) {
            const size_t row = (size_t)i * w_;
            uint64_t xc = (x_[row + wc] >> bc) & 1;
            uint64_t zc = (z_[row + wc] >> bc) & 1;
            uint64_t xt = (x_[row + wt] >> bt) & 1;
            uint64_t zt = (z_[row + wt] >> bt) & 1;
            r_[i] ^= (uint8_t)(xc & zt & (xt ^ zc ^ 1));
            x_[row + wt] ^= (0 - xc) & mt;
            z_[row + wc] ^= (0 - zt) & mc;
        }
    }

    void apply_cz(int a, int b) {
        check_qubit(a);
        check_qubit(b);
        if (a == b) throw std::invalid_argument("CZ: qubits must be distinct");
        const size_t wa = a >> 6, wb = b >> 6;
        const int ba = a & 63, bb = b & 63;
        const uint64_t ma = 1ull << ba, mb = 1ull << bb;
        for (int i = 0; i < 2 * n_; ++i) {
            const size_t row = (size_t)i * w_;
            uint64_t xa = (x_[row + wa] >> ba) & 1;
            uint64_t za = (z_[row + wa] >> ba) & 1;
            uint64_t xb = (x_[row + wb] >> bb) & 1;
            uint64_t zb = (z_[row + wb] >> bb) & 1;
            r_[i] ^= (uint8_t)(xa & xb & (za ^ zb));
            z_[row + wa] ^= (0 - xb) & ma;
            z_[row + wb] ^= (0 - xa) & mb;
        }
    }

    void apply(Gate g, int q0, int q1 = -1) {
        switch (g) {
            case Gate::H: apply_h(q0); return;
            case Gate::S: apply_s(q0); return;
            case Gate::X: apply_x(q0); return;
            case Gate::Y: apply_y(q0); return;
            case Gate::Z: apply_z(q0); return;
            case Gate::CNOT: apply_cnot(q0, q1); return;
            case Gate::CZ: apply_cz(q0, q1); return;
        }
    }

    /// Z-basis measurement. Random outcomes consume exactly one RNG draw, so
    /// a shot replays bit-identically from its stream.
    std::pair<int, bool> measure_z(int q, ShotRng& rng) {
        check_qubit(q);
        const size_t wq = q >> 6;
        const int b = q & 63;
        int p = -1;
        for (int i = n_; i < 2 * n_; ++i) {
            if ((x_[(size_t)i * w_ + wq] >> b) & 1) {
                p = i;
                break;
            }
        }
        if (p >= 0) {
            for (int i = 0; i < 2 * n_; ++i) {
                if (i != p && ((x_[(size_t)i * w_ + wq] >> b) & 1)) rowsum(i, p);
            }
            copy_row(p - n_, p);
            zero_row(p);
            z_[(size_t)p * w_ + wq] |= 1ull << b;
            r_[p] = rng.next_bit() ? 1 : 0;
            return {r_[p], false};
        }
        zero_row(2 * n_);
        for (int i = 0; i < n_; ++i) {
            if ((x_[(size_t)i * w_ + wq] >> b) & 1) rowsum(2 * n_, i + n_);
        }
        return {r_[2 * n_], true};
    }

    /// Reset to |0> or |1> via measure-and-flip. Returns the pre-flip
    /// measurement outcome and its determinism flag.
    std::pair<int, bool> reset(int q, int target, ShotRng& rng) {
        auto res = measure_z(q, rng);
        if (res.first != target) apply_x(q);
        return res;
    }

    bool x_bit(int row, int q) const { return (x_[(size_t)row * w_ + (q >> 6)] >> (q & 63)) & 1; }
    bool z_bit(int row, int q) const { return (z_[(size_t)row * w_ + (q >> 6)] >> (q & 63)) & 1; }
    int phase(int row) const { return r_[row]; }

    /// Symplectic pairing: stabilizers commute pairwise, destabilizer i
    /// anticommutes with stabilizer i only, destabilizers commute pairwise.
    bool check_invariants() const {
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                if (symplectic(n_ + i, n_ + j) != 0) return false;
                if (symplectic(i, j) != 0) return false;
                if (symplectic(i, n_ + j) != (i == j ? 1 : 0)) return false;
            }
        }
        return true;
    }

   private:
    void check_qubit(int q) const {
        if (q < 0 || q >= n_) {
            throw std::out_of_range("qubit index " + std::to_string(q) + " out of range [0, " +
                                    std::to_string(n_) + ")");
        }
    }

    void zero_row(int row) {
        for (int w = 0; w < w_; ++w) {
            x_[(size_t)row * w_ + w] = 0;
            z_[(size_t)row * w_ + w] = 0;
        }
        r_[row] = 0;
    }

    void copy_row(int dst, int src) {
        for (int w = 0; w < w_; ++w) {
            x_[(size_t)dst * w_ + w] = x_[(size_t)src * w_ + w];
            z_[(size_t)dst * w_ + w] = z_[(size_t)src * w_ + w];
        }
        r_[dst] = r_[src];
    }

    /// Row h := row i * row h with the group phase tracked mod 4. The
    /// plus/minus masks pick out the Pauli products contributing +i / -i.
    void rowsum(int h, int i) {
        int e = 2 * (r_[h] + r_[i]);
        const size_t rh = (size_t)h * w_, ri = (size_t)i * w_;
        for (int w = 0; w < w_; ++w) {
            uint64_t x1 = x_[ri + w], z1 = z_[ri + w];
            uint64_t x2 = x_[rh + w], z2 = z_[rh + w];
            uint64_t plus = (x1 & ~z1 & x2 & z2) | (x1 & z1 & ~x2 & z2) | (~x1 & z1 & x2 & ~z2);
            uint64_t minus = (x1 & ~z1 & ~x2 & z2) | (x1 & z1 & x2 & ~z2) | (~x1 & z1 & x2 & z2);
            e += std::popcount(plus) - std::popcount(minus);
            x_[rh + w] ^= x1;
            z_[rh + w] ^= z1;
        }
        r_[h] = ((e % 4) + 4) % 4 == 2 ? 1 : 0;
    }

    int symplectic(int row_a, int row_b) const {
        int acc = 0;
        for (int w = 0; w < w_; ++w) {
            acc ^= std::popcount(x_[(size_t)row_a * w_ + w] & z_[(size_t)row_b * w_ + w]) & 1;
            acc ^= std::popcount(z_[(size_t)row_a * w_ + w] & x_[(size_t)row_b * w_ + w]) & 1;
        }
        return acc;
    }

    int n_;
    int w_;
    std::vector<uint64_t> x_;
    std::vector<uint64_t> z_;
    std::vector<uint8_t> r_;
};

}  // namespace thermstab
