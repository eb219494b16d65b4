//! Hamming(7,4) code in systematic form `G = [I | P]`.
//!
//! Codeword layout is `d1 d2 d3 d4 p1 p2 p3` with `p1 = d1+d2+d4`,
//! `p2 = d1+d3+d4`, `p3 = d2+d3+d4` (mod 2).

/// Parity part of the generator: row `i` gives the parities set by data bit `i`.
const P: [[u8; 3]; 4] = [[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]];

#[derive(Debug, Clone)]
pub struct Hamming74 {
    codebook: Vec<[u8; 7]>,
}

impl Default for Hamming74 {
    fn default() -> Self {
        Self::new()
    }
}

impl Hamming74 {
    pub fn new() -> Self {
        let codebook = (0..16).map(|m| Self::encode_bits(&message_bits(m))).collect();
        Self { codebook }
    }

    /// Generator matrix, 4×7.
    pub fn generator() -> [[u8; 7]; 4] {
        let mut g = [[0u8; 7]; 4];
        for i in 0..4 {
            g[i][i] = 1;
            g[i][4..].copy_from_slice(&P[i]);
        }
        g
    }

    /// Parity-check matrix `H = [Pᵀ | I]`, 3×7.
    pub fn parity_check() -> [[u8; 7]; 3] {
        let mut h = [[0u8; 7]; 3];
        for r in 0..3 {
            for i in 0..4 {
                h[r][i] = P[i][r];
            }
            h[r][4 + r] = 1;
        }
        h
    }

    pub fn codebook(&self) -> &[[u8; 7]] {
        &self.codebook
    }

    fn encode_bits(d: &[u8; 4]) -> [u8; 7] {
        let mut c = [0u8; 7];
        c[..4].copy_from_slice(d);
        for r in 0..3 {
            c[4 + r] = (0..4).map(|i| d[i] & P[i][r]).fold(0, |a, b| a ^ b);
        }
        c
    }

    pub fn encode(&self, d: &[u8; 4]) -> [u8; 7] {
        Self::encode_bits(d)
    }

    pub fn syndrome(c: &[u8; 7]) -> [u8; 3] {
        let h = Self::parity_check();
        let mut s = [0u8; 3];
        for r in 0..3 {
            s[r] = (0..7).map(|j| h[r][j] & c[j]).fold(0, |a, b| a ^ b);
        }
        s
    }

    /// Syndrome decoding: flips the single bit whose column matches the
    /// syndrome, then returns the data bits.
    pub fn decode_hard(&self, r: &[u8; 7]) -> [u8; 4] {
        let s = Self::syndrome(r);
        let mut c = *r;
        if s != [0, 0, 0] {
            let h = Self::parity_check();
            if let Some(j) = (0..7).find(|&j| (0..3).all(|k| h[k][j] == s[k])) {
                c[j] ^= 1;
            }
        }
        [c[0], c[1], c[2], c[3]]
    }

    /// Maximum-likelihood decoding of a BPSK soft vector (bit 0 sent as +1):
    /// nearest codeword in Euclidean distance.
    pub fn decode_mld(&self, y: &[f64; 7]) -> [u8; 4] {
        let m = self.mld_index(y);
        message_bits(m)
    }

    /// Message index of the nearest codeword.
    pub fn mld_index(&self, y: &[f64; 7]) -> usize {
        // Minimizing distance to ±1 codewords is maximizing correlation.
        let mut best = 0;
        let mut best_corr = f64::NEG_INFINITY;
        for (m, c) in self.codebook.iter().enumerate() {
            let corr: f64 = c.iter().zip(y).map(|(&b, v)| if b == 0 { *v } else { -*v }).sum();
            if corr > best_corr {
                best_corr = corr;
                best = m;
            }
        }
        best
    }

    pub fn min_distance(&self) -> u32 {
        let mut d = u32::MAX;
        for (i, a) in self.codebook.iter().enumerate() {
            for b in &self.codebook[i + 1..] {
                d = d.min(a.iter().zip(b).filter(|(x, y)| x != y).count() as u32);
            }
        }
        d
    }
}

/// Big-endian 4-bit message.
pub fn message_bits(m: usize) -> [u8; 4] {
    [(m >> 3 & 1) as u8, (m >> 2 & 1) as u8, (m >> 1 & 1) as u8, (m & 1) as u8]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_orthogonal_to_parity_check() {
        let (g, h) = (Hamming74::generator(), Hamming74::parity_check());
        for gr in &g {
            for hr in &h {
                assert_eq!(gr.iter().zip(hr).map(|(a, b)| a & b).fold(0, |x, y| x ^ y), 0);
            }
        }
    }

    #[test]
    fn zero_word_and_minimum_distance() {
        let code = Hamming74::new();
        assert_eq!(code.encode(&[0; 4]), [0; 7]);
        assert_eq!(code.min_distance(), 3);
    }

    #[test]
    fn parity_equations() {
        let c = Hamming74::new().encode(&[1, 0, 0, 1]);
        assert_eq!(c, [1, 0, 0, 1, 0, 0, 1]);
    }
}
