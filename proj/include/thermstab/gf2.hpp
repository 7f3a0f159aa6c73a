#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace thermstab {

/// Dense GF(2) matrix, rows packed into 64-bit words.
class BitMatrix {
   public:
    BitMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), words_((cols + 63) >> 6), bits_((size_t)rows * words_, 0) {
        if (rows < 0 || cols <= 0) throw std::invalid_argument("BitMatrix: bad shape");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int words() const { return words_; }

    bool get(int r, int c) const { return (row(r)[c >> 6] >> (c & 63)) & 1; }
    void set(int r, int c, bool v) {
        uint64_t m = 1ull << (c & 63);
        if (v)
            row(r)[c >> 6] |= m;
        else
            row(r)[c >> 6] &= ~m;
    }

    uint64_t* row(int r) { return bits_.data() + (size_t)r * words_; }
    const uint64_t* row(int r) const { return bits_.data() + (size_t)r * words_; }

    std::vector<uint64_t> row_copy(int r) const {
        return std::vector<uint64_t>(row(r), row(r) + words_);
    }

    BitMatrix transposed() const {
        BitMatrix t(cols_, rows_);
        for (int r = 0; r < rows_; ++r)
            for (int c = 0; c < cols_; ++c)
                if (get(r, c)) t.set(c, r, true);
        return t;
    }

    /// GF(2) matrix product.
    BitMatrix multiply(const BitMatrix& o) const {
        if (cols_ != o.rows_) throw std::invalid_argument("BitMatrix: shape mismatch");
        BitMatrix out(rows_, o.cols_);
        for (int r = 0; r < rows_; ++r) {
            for (int k = 0; k < cols_; ++k) {
                if (!get(r, k)) continue;
                for (int w = 0; w < o.words_; ++w) out.row(r)[w] ^= o.row(k)[w];
            }
        }
        return out;
    }

    bool is_zero() const {
        for (uint64_t w : bits_)
            if (w) return false;
        return true;
    }

    int rank() const {
        BitMatrix m = *this;
        int rank = 0;
        for (int c = 0; c < cols_ && rank < rows_; ++c) {
            int pivot = -1;
            for (int r = rank; r < rows_; ++r) {
                if (m.get(r, c)) {
                    pivot = r;
                    break;
                }
            }
            if (pivot < 0) continue;
            for (int w = 0; w < words_; ++w) std::swap(m.row(rank)[w], m.row(pivot)[w]);
            for (int r = 0; r < rows_; ++r) {
                if (r != rank && m.get(r, c)) {
                    for (int w = 0; w < words_; ++w) m.row(r)[w] ^= m.row(rank)[w];
                }
            }
            ++rank;
        }
        return rank;
    }

    /// Basis of {x : M x = 0}, each vector packed over cols bits.
    std::vector<std::vector<uint64_t>> kernel_basis() const {
        BitMatrix m = *this;
        std::vector<int> pivot_col;
        int rank = 0;
        for (int c = 0; c < cols_ && rank < rows_; ++c) {
            int pivot = -1;
            for (int r = rank; r < rows_; ++r) {
                if (m.get(r, c)) {
                    pivot = r;
                    break;
                }
            }
            if (pivot < 0) continue;
            for (int w = 0; w < words_; ++w) std::swap(m.row(rank)[w], m.row(pivot)[w]);
            for (int r = 0; r < rows_; ++r) {
                if (r != rank && m.get(r, c)) {
                    for (int w = 0; w < words_; ++w) m.row(r)[w] ^= m.row(rank)[w];
                }
            }
            pivot_col.push_back(c);
            ++rank;
        }
        std::vector<bool> is_pivot(cols_, false);
        for (int c : pivot_col) is_pivot[c] = true;

        std::vector<std::vector<uint64_t>> basis;
        const int vec_words = (cols_ + 63) >> 6;
        for (int free_col = 0; free_col < cols_; ++free_col) {
            if (is_pivot[free_col]) continue;
            std::vector<uint64_t> v(vec_words, 0);
            v[free_col >> 6] |= 1ull << (free_col & 63);
            // Back-substitute: pivot variable r equals the free column's
            // coefficient in the reduced row.
            for (int r = 0; r < rank; ++r) {
                if (m.get(r, free_col)) {
                    int pc = pivot_col[r];
                    v[pc >> 6] |= 1ull << (pc & 63);
                }
            }
            basis.push_back(std::move(v));
        }
        return basis;
    }

   private:
    int rows_, cols_, words_;
    std::vector<uint64_t> bits_;
};

/// Incremental GF(2) row-space membership with on-the-fly reduction.
class Gf2Span {
   public:
    explicit Gf2Span(int cols) : cols_(cols), words_((cols + 63) >> 6) {}

    /// Returns true when v was independent of the current span (and adds it).
    bool insert(std::vector<uint64_t> v) {
        reduce(v);
        int lead = leading_bit(v);
        if (lead < 0) return false;
        basis_.push_back(std::move(v));
        lead_.push_back(lead);
        return true;
    }

    bool contains(std::vector<uint64_t> v) const {
        reduce(v);
        return leading_bit(v) < 0;
    }

    int dimension() const { return (int)basis_.size(); }

   private:
    void reduce(std::vector<uint64_t>& v) const {
        for (size_t i = 0; i < basis_.size(); ++i) {
            int lb = lead_[i];
            if ((v[lb >> 6] >> (lb & 63)) & 1) {
                for (int w = 0; w < words_; ++w) v[w] ^= basis_[i][w];
            }
        }
    }

    int leading_bit(const std::vector<uint64_t>& v) const {
        for (int w = 0; w < words_; ++w) {
            if (v[w]) return (w << 6) + std::countr_zero(v[w]);
        }
        return -1;
    }

    int cols_;
    int words_;
    std::vector<std::vector<uint64_t>> basis_;
    std::vector<int> lead_;
};

}  // namespace thermstab
