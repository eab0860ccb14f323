//! Bid files: decimal literals separated by whitespace over one or more
//! lines, with `#` starting a comment that runs to the end of the line.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BidParseError {
    pub token: String,
    /// One-based line number.
    pub line: usize,
    /// One-based index of the token among all bids in the file.
    pub position: usize,
}

impl fmt::Display for BidParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: token `{}` at position {} is not a decimal number",
            self.line, self.token, self.position
        )
    }
}

fn is_decimal_literal(token: &str) -> bool {
    token.bytes().any(|b| b.is_ascii_digit())
        && token
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'+' | b'-' | b'.' | b'e' | b'E'))
}

pub fn parse_bids(text: &str) -> Result<Vec<f64>, BidParseError> {
    let mut bids = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("");
        for token in content.split_whitespace() {
            let value = is_decimal_literal(token)
                .then(|| token.parse::<f64>().ok())
                .flatten();
            match value {
                Some(v) => bids.push(v),
                None => {
                    return Err(BidParseError {
                        token: token.to_string(),
                        line: line_no + 1,
                        position: bids.len() + 1,
                    })
                }
            }
        }
    }
    Ok(bids)
}
