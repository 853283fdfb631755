use sha2::{Digest, Sha256};

/// Keeps at most `cap` bytes of `text`, dropping the head. External tools
/// print the decisive error last, so the tail is what matters.
pub fn cap_tail(text: &str, cap: usize) -> String {
    if text.len() <= cap {
        return text.to_string();
    }
    let mut start = text.len() - cap;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    format!(
        "[... {} bytes truncated ...]\n{}",
        start,
        &text[start..]
    )
}

/// Keeps at most `cap` bytes from the start of `text`.
pub fn cap_head(text: &str, cap: usize) -> &str {
    if text.len() <= cap {
        return text;
    }
    let mut end = cap;
    while !text.is_char_boundary(end) {
        end -= 1;
    }
    &text[..end]
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Short digest used in trace payloads.
pub fn short_digest(bytes: &[u8]) -> String {
    sha256_hex(bytes)[..16].to_string()
}

/// Formats a real so that integral values keep one decimal (`1.0`, `300.0`).
pub fn fmt_real(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{value:.1}")
    } else {
        format!("{value}")
    }
}
