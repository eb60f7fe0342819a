//! Stable content fingerprints for manifests and checkpoints (FNV-1a, 64-bit).

/// FNV-1a over the input bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hex form of [`fnv1a64`].
pub fn fingerprint_hex(bytes: &[u8]) -> String {
    format!("{:016x}", fnv1a64(bytes))
}
