//! Paillier additively homomorphic encryption over big integers.
//!
//! Plaintexts live in `Z_n`, ciphertexts in `Z_{n^2}`. With `g = n + 1` the
//! scheme admits the usual shortcuts: `Enc(m) = (1 + m*n) * r^n mod n^2` and
//! `mu = lambda^-1 mod n`. Signed ring elements are embedded by mapping
//! negative values into the top of the plaintext space, so homomorphic sums
//! of fixed-point gradients decode back to exact `Z_{2^64}` ring sums.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::crypto::fixed::Fx;
use crate::error::{Error, Result};

const MILLER_RABIN_ROUNDS: usize = 64;

/// Small primes used to pre-filter candidates before Miller-Rabin.
const SMALL_PRIMES: &[u64] = &[
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283,
    293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379, 383, 389, 397, 401,
    409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463, 467, 479, 487, 491, 499,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaillierPublic {
    n: BigUint,
    n_sq: BigUint,
    half_n: BigUint,
    bits: usize,
}

#[derive(Debug, Clone)]
pub struct PaillierSecret {
    lambda: BigUint,
    mu: BigUint,
    /// CRT acceleration over p^2 and q^2. Only the key holder can use it;
    /// that party performs the bulk of encryptions and every decryption.
    p_sq: BigUint,
    q_sq: BigUint,
    p_sq_totient: BigUint,
    q_sq_totient: BigUint,
    p_sq_inv_mod_q_sq: BigUint,
}

#[derive(Debug, Clone)]
pub struct PaillierKeypair {
    pub public: PaillierPublic,
    pub secret: PaillierSecret,
}

/// A Paillier ciphertext: an element of `Z_{n^2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ciphertext(BigUint);

impl PaillierPublic {
    pub fn modulus(&self) -> &BigUint {
        &self.n
    }

    pub fn key_bits(&self) -> usize {
        self.bits
    }

    /// Fixed serialized width of one ciphertext under this key.
    pub fn ciphertext_bytes(&self) -> usize {
        self.bits / 4
    }

    /// Fixed serialized width of the public modulus.
    pub fn modulus_bytes(&self) -> usize {
        self.bits / 8
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        to_fixed_be(&self.n, self.modulus_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let n = BigUint::from_bytes_be(bytes);
        let bits = bytes.len() * 8;
        if n.bits() as usize != bits {
            return Err(Error::Config(format!(
                "modulus does not fill {bits} bits"
            )));
        }
        Ok(Self::from_modulus(n, bits))
    }

    fn from_modulus(n: BigUint, bits: usize) -> Self {
        let n_sq = &n * &n;
        let half_n = &n >> 1;
        PaillierPublic { n, n_sq, half_n, bits }
    }
}

impl PaillierKeypair {
    /// Generate a keypair with two equal-size primes. Deterministic for a
    /// seeded `rng`, which keeps test keys reproducible.
    pub fn generate<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> Result<PaillierKeypair> {
        if bits < 64 || bits % 2 != 0 {
            return Err(Error::Config(format!("unsupported key size {bits}")));
        }
        let half = bits / 2;
        let p = gen_prime(half, rng);
        let q = loop {
            let q = gen_prime(half, rng);
            if q != p {
                break q;
            }
        };
        let n = &p * &q;
        debug_assert_eq!(n.bits() as usize, bits);
        let public = PaillierPublic::from_modulus(n.clone(), bits);
        let lambda = (&p - 1u32).lcm(&(&q - 1u32));
        // g = n + 1, so L(g^lambda mod n^2) = lambda mod n and mu = lambda^-1.
        let mu = mod_inverse(&(&lambda % &n), &n)
            .ok_or_else(|| Error::Config("lambda not invertible".into()))?;
        let p_sq = &p * &p;
        let q_sq = &q * &q;
        let p_sq_inv_mod_q_sq = mod_inverse(&(&p_sq % &q_sq), &q_sq)
            .ok_or_else(|| Error::Config("p^2 not invertible mod q^2".into()))?;
        Ok(PaillierKeypair {
            public,
            secret: PaillierSecret {
                lambda,
                mu,
                p_sq_totient: &p_sq - &p,
                q_sq_totient: &q_sq - &q,
                p_sq,
                q_sq,
                p_sq_inv_mod_q_sq,
            },
        })
    }
}

impl PaillierSecret {
    /// base^exp mod n^2 via CRT: two half-size exponentiations with the
    /// exponent reduced by the Carmichael totients of p^2 and q^2.
    fn powmod_n_sq(&self, base: &BigUint, exp: &BigUint) -> BigUint {
        let xp = (base % &self.p_sq).modpow(&(exp % &self.p_sq_totient), &self.p_sq);
        let xq = (base % &self.q_sq).modpow(&(exp % &self.q_sq_totient), &self.q_sq);
        // x = xp + p^2 * ((xq - xp) * (p^2)^-1 mod q^2)
        let diff = if xq >= xp {
            (&xq - &xp) % &self.q_sq
        } else {
            &self.q_sq - (&xp - &xq) % &self.q_sq
        };
        let t = (diff * &self.p_sq_inv_mod_q_sq) % &self.q_sq;
        xp + &self.p_sq * t
    }
}

/// Encrypt a plaintext in `[0, n)`. Every call draws a fresh randomizer.
pub fn encrypt<R: Rng + ?Sized>(pk: &PaillierPublic, m: &BigUint, rng: &mut R) -> Result<Ciphertext> {
    if m >= &pk.n {
        return Err(Error::OutOfRange);
    }
    let r = loop {
        let r = rng.gen_biguint_range(&BigUint::one(), &pk.n);
        if r.gcd(&pk.n).is_one() {
            break r;
        }
    };
    // (1 + m*n) * r^n mod n^2
    let gm = (BigUint::one() + m * &pk.n) % &pk.n_sq;
    let rn = r.modpow(&pk.n, &pk.n_sq);
    Ok(Ciphertext((gm * rn) % &pk.n_sq))
}

/// Decrypt to the plaintext residue in `[0, n)`.
pub fn decrypt(pk: &PaillierPublic, sk: &PaillierSecret, ct: &Ciphertext) -> Result<BigUint> {
    if ct.0 >= pk.n_sq {
        return Err(Error::MalformedCiphertext);
    }
    let u = sk.powmod_n_sq(&ct.0, &sk.lambda);
    let l = (u - BigUint::one()) / &pk.n;
    Ok((l * &sk.mu) % &pk.n)
}

/// Encryption by the key holder: the randomizer power runs through the CRT
/// fast path. Ciphertexts are distributed identically to [`encrypt`].
pub fn encrypt_with_secret<R: Rng + ?Sized>(
    pk: &PaillierPublic,
    sk: &PaillierSecret,
    m: &BigUint,
    rng: &mut R,
) -> Result<Ciphertext> {
    if m >= &pk.n {
        return Err(Error::OutOfRange);
    }
    let r = loop {
        let r = rng.gen_biguint_range(&BigUint::one(), &pk.n);
        if r.gcd(&pk.n).is_one() {
            break r;
        }
    };
    let gm = (BigUint::one() + m * &pk.n) % &pk.n_sq;
    let rn = sk.powmod_n_sq(&r, &pk.n);
    Ok(Ciphertext((gm * rn) % &pk.n_sq))
}

/// Homomorphic addition of plaintexts: multiply ciphertexts mod `n^2`.
pub fn add(pk: &PaillierPublic, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
    if a.0 >= pk.n_sq || b.0 >= pk.n_sq {
        return Err(Error::MalformedCiphertext);
    }
    Ok(Ciphertext((&a.0 * &b.0) % &pk.n_sq))
}

/// Encrypt a signed ring element. Negative values map into `[n - 2^63, n)`.
pub fn encrypt_ring<R: Rng + ?Sized>(pk: &PaillierPublic, x: Fx, rng: &mut R) -> Result<Ciphertext> {
    encrypt(pk, &embed_signed(pk, x.signed()), rng)
}

/// Decrypt a (possibly aggregated) signed embedding back onto the ring.
/// Fails when the signed plaintext no longer fits in 64 bits, which would
/// make the ring image ambiguous.
pub fn decrypt_ring(pk: &PaillierPublic, sk: &PaillierSecret, ct: &Ciphertext) -> Result<Fx> {
    let m = decrypt(pk, sk, ct)?;
    let signed: BigInt = if m > pk.half_n {
        -BigInt::from(&pk.n - &m)
    } else {
        BigInt::from(m)
    };
    if signed.abs() > BigInt::from(i64::MAX) {
        return Err(Error::OutOfRange);
    }
    let s: i64 = (&signed).try_into().map_err(|_| Error::OutOfRange)?;
    Ok(Fx(s as u64))
}

/// Encryption of the additive identity, used to seed homomorphic folds.
pub fn encrypt_zero<R: Rng + ?Sized>(pk: &PaillierPublic, rng: &mut R) -> Result<Ciphertext> {
    encrypt(pk, &BigUint::zero(), rng)
}

/// Encrypt a batch of ring elements in parallel. Randomness is derived from
/// `seed` per index, so the batch is reproducible.
pub fn encrypt_ring_batch(pk: &PaillierPublic, values: &[Fx], seed: u64) -> Result<Vec<Ciphertext>> {
    values
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            encrypt_ring(pk, x, &mut rng)
        })
        .collect()
}

/// Key-holder batch encryption on the CRT fast path.
pub fn encrypt_ring_batch_with_secret(
    pk: &PaillierPublic,
    sk: &PaillierSecret,
    values: &[Fx],
    seed: u64,
) -> Result<Vec<Ciphertext>> {
    values
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
            encrypt_with_secret(pk, sk, &embed_signed(pk, x.signed()), &mut rng)
        })
        .collect()
}

/// Decrypt a batch of ring embeddings in parallel.
pub fn decrypt_ring_batch(
    pk: &PaillierPublic,
    sk: &PaillierSecret,
    cts: &[Ciphertext],
) -> Result<Vec<Fx>> {
    cts.par_iter().map(|ct| decrypt_ring(pk, sk, ct)).collect()
}

impl Ciphertext {
    /// Big-endian bytes at the key's fixed ciphertext width.
    pub fn to_bytes(&self, pk: &PaillierPublic) -> Vec<u8> {
        to_fixed_be(&self.0, pk.ciphertext_bytes())
    }

    pub fn from_bytes(pk: &PaillierPublic, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != pk.ciphertext_bytes() {
            return Err(Error::MalformedCiphertext);
        }
        let v = BigUint::from_bytes_be(bytes);
        if v >= pk.n_sq {
            return Err(Error::MalformedCiphertext);
        }
        Ok(Ciphertext(v))
    }
}

fn embed_signed(pk: &PaillierPublic, s: i64) -> BigUint {
    if s >= 0 {
        BigUint::from(s as u64)
    } else {
        &pk.n - BigUint::from(s.unsigned_abs())
    }
}

fn to_fixed_be(v: &BigUint, width: usize) -> Vec<u8> {
    let raw = v.to_bytes_be();
    assert!(raw.len() <= width, "value wider than {width} bytes");
    let mut out = vec![0u8; width];
    out[width - raw.len()..].copy_from_slice(&raw);
    out
}

fn gen_prime<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> BigUint {
    loop {
        let mut cand = rng.gen_biguint(bits as u64);
        // Force the top two bits so p*q fills exactly 2*bits, and make it odd.
        cand.set_bit(bits as u64 - 1, true);
        cand.set_bit(bits as u64 - 2, true);
        cand.set_bit(0, true);
        if SMALL_PRIMES
            .iter()
            .any(|&p| (&cand % BigUint::from(p)).is_zero())
        {
            continue;
        }
        if miller_rabin(&cand, MILLER_RABIN_ROUNDS, rng) {
            return cand;
        }
    }
}

fn miller_rabin<R: Rng + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_one);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_one {
            continue 'witness;
        }
        for _ in 0..s.saturating_sub(1) {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mod_inverse(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    let a = BigInt::from(a.clone());
    let m_int = BigInt::from(m.clone());
    let ext = a.extended_gcd(&m_int);
    if !ext.gcd.is_one() {
        return None;
    }
    let mut x = ext.x % &m_int;
    if x.is_negative() {
        x += &m_int;
    }
    x.try_into().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_keypair(bits: usize, seed: u64) -> PaillierKeypair {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        PaillierKeypair::generate(bits, &mut rng).unwrap()
    }

    #[test]
    fn decrypt_of_encrypt_zero() {
        let kp = test_keypair(512, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let ct = encrypt(&kp.public, &BigUint::zero(), &mut rng).unwrap();
        assert_eq!(decrypt(&kp.public, &kp.secret, &ct).unwrap(), BigUint::zero());
    }

    #[test]
    fn homomorphic_add_smoke() {
        let kp = test_keypair(512, 3);
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let a = encrypt(&kp.public, &BigUint::from(2u32), &mut rng).unwrap();
        let b = encrypt(&kp.public, &BigUint::from(3u32), &mut rng).unwrap();
        let sum = add(&kp.public, &a, &b).unwrap();
        assert_eq!(decrypt(&kp.public, &kp.secret, &sum).unwrap(), BigUint::from(5u32));
    }

    #[test]
    fn homomorphic_add_random_pairs() {
        let kp = test_keypair(512, 5);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a = rng.gen_biguint_range(&BigUint::zero(), kp.public.modulus());
            let b = rng.gen_biguint_range(&BigUint::zero(), kp.public.modulus());
            let ca = encrypt(&kp.public, &a, &mut rng).unwrap();
            let cb = encrypt(&kp.public, &b, &mut rng).unwrap();
            let sum = add(&kp.public, &ca, &cb).unwrap();
            let expect = (&a + &b) % kp.public.modulus();
            assert_eq!(decrypt(&kp.public, &kp.secret, &sum).unwrap(), expect);
        }
    }

    #[test]
    fn encryption_is_rerandomized() {
        let kp = test_keypair(512, 7);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let m = BigUint::from(42u32);
        let a = encrypt(&kp.public, &m, &mut rng).unwrap();
        let b = encrypt(&kp.public, &m, &mut rng).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn signed_ring_round_trip() {
        let kp = test_keypair(512, 9);
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for x in [-1.0f64, -0.25, 0.0, 0.125, 0.999, -123456.5] {
            let fx = Fx::encode(x).unwrap();
            let ct = encrypt_ring(&kp.public, fx, &mut rng).unwrap();
            assert_eq!(decrypt_ring(&kp.public, &kp.secret, &ct).unwrap(), fx);
        }
    }

    #[test]
    fn signed_sums_match_ring_sums() {
        let kp = test_keypair(512, 11);
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let values = [-0.75f64, 0.5, -0.125, 0.9, -0.9, 0.0625];
        let mut acc_ct = encrypt_zero(&kp.public, &mut rng).unwrap();
        let mut acc_fx = Fx::ZERO;
        for &v in &values {
            let fx = Fx::encode(v).unwrap();
            acc_fx += fx;
            let ct = encrypt_ring(&kp.public, fx, &mut rng).unwrap();
            acc_ct = add(&kp.public, &acc_ct, &ct).unwrap();
        }
        assert_eq!(decrypt_ring(&kp.public, &kp.secret, &acc_ct).unwrap(), acc_fx);
    }

    #[test]
    fn fixed_width_serialization_round_trips() {
        let kp = test_keypair(512, 13);
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let ct = encrypt(&kp.public, &BigUint::from(77u32), &mut rng).unwrap();
        let bytes = ct.to_bytes(&kp.public);
        assert_eq!(bytes.len(), kp.public.ciphertext_bytes());
        assert_eq!(Ciphertext::from_bytes(&kp.public, &bytes).unwrap(), ct);
    }

    #[test]
    fn rejects_plaintext_at_modulus() {
        let kp = test_keypair(512, 15);
        let mut rng = ChaCha12Rng::seed_from_u64(16);
        assert!(encrypt(&kp.public, kp.public.modulus(), &mut rng).is_err());
    }

    #[test]
    fn ring_decode_outside_64_bits_is_an_error() {
        // A plaintext near n/2 has no faithful 64-bit signed image.
        let kp = test_keypair(512, 21);
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let huge = kp.public.modulus() >> 2;
        let ct = encrypt(&kp.public, &huge, &mut rng).unwrap();
        assert!(matches!(
            decrypt_ring(&kp.public, &kp.secret, &ct),
            Err(Error::OutOfRange)
        ));
    }

    #[test]
    fn keygen_is_deterministic_from_seed() {
        let a = test_keypair(512, 99);
        let b = test_keypair(512, 99);
        assert_eq!(a.public.modulus(), b.public.modulus());
    }

    #[test]
    fn crt_encryption_agrees_with_the_public_path() {
        let kp = test_keypair(512, 17);
        for i in 0..20u64 {
            // Same randomizer stream on both paths yields identical
            // ciphertexts; decryption agrees either way.
            let m = BigUint::from(i * 977 + 5);
            let mut rng_a = ChaCha12Rng::seed_from_u64(i);
            let mut rng_b = ChaCha12Rng::seed_from_u64(i);
            let slow = encrypt(&kp.public, &m, &mut rng_a).unwrap();
            let fast = encrypt_with_secret(&kp.public, &kp.secret, &m, &mut rng_b).unwrap();
            assert_eq!(slow, fast);
            assert_eq!(decrypt(&kp.public, &kp.secret, &fast).unwrap(), m);
        }
    }

    #[test]
    fn crt_decrypt_matches_on_aggregates() {
        let kp = test_keypair(512, 23);
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        let values = [-0.5f64, 0.25, 0.75, -0.125];
        let fxs: Vec<Fx> = values.iter().map(|&v| Fx::encode(v).unwrap()).collect();
        let cts = encrypt_ring_batch_with_secret(&kp.public, &kp.secret, &fxs, 5).unwrap();
        let mut acc = encrypt_zero(&kp.public, &mut rng).unwrap();
        for ct in &cts {
            acc = add(&kp.public, &acc, ct).unwrap();
        }
        let expect: Fx = fxs.iter().copied().sum();
        assert_eq!(decrypt_ring(&kp.public, &kp.secret, &acc).unwrap(), expect);
    }
}
