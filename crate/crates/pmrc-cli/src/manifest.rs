//! Human-readable deployment manifest.
//!
//! Plain `key=value` lines in a fixed order, closed by a `checksum=` line
//! holding the SHA-256 of everything above it. Share files reference that
//! digest, which pins them to one deployment.

use pmrc::gf::FieldModulus;
use pmrc::params::{mbr_params, msr_params, CodeMode, CodeParams};
use pmrc::secure::SecureCode;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("manifest line {0} is not key=value")]
    BadLine(usize),
    #[error("manifest is missing `{0}`")]
    MissingKey(&'static str),
    #[error("manifest `{key}` has invalid value `{value}`")]
    BadValue { key: &'static str, value: String },
    #[error("manifest keys out of order or unknown key `{0}`")]
    UnexpectedKey(String),
    #[error("manifest checksum mismatch")]
    ChecksumMismatch,
    #[error("manifest has no checksum line")]
    MissingChecksum,
    #[error("unsupported manifest format version {0}")]
    BadVersion(u32),
    #[error("manifest parameters rejected: {0}")]
    BadParams(String),
}

pub const FORMAT_VERSION: u32 = 1;

const KEYS: [&str; 13] = [
    "format_version",
    "mode",
    "n",
    "k",
    "d",
    "beta",
    "q",
    "ell",
    "ell_prime",
    "stripes",
    "original_len",
    "points",
    "content_sha256",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub mode: CodeMode,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub beta: usize,
    pub q: u64,
    pub ell: usize,
    pub ell_prime: usize,
    pub stripes: usize,
    pub original_len: u64,
    /// Base evaluation points, n plus one per shortening step.
    pub points: Vec<u64>,
    pub content_sha256: [u8; 32],
}

impl Manifest {
    fn body(&self) -> String {
        let points: Vec<String> = self.points.iter().map(|p| p.to_string()).collect();
        format!(
            "format_version={}\nmode={}\nn={}\nk={}\nd={}\nbeta={}\nq={}\nell={}\n\
             ell_prime={}\nstripes={}\noriginal_len={}\npoints={}\ncontent_sha256={}\n",
            FORMAT_VERSION,
            self.mode,
            self.n,
            self.k,
            self.d,
            self.beta,
            self.q,
            self.ell,
            self.ell_prime,
            self.stripes,
            self.original_len,
            points.join(","),
            hex::encode(self.content_sha256),
        )
    }

    /// Digest that share files embed to bind themselves to this manifest.
    pub fn checksum(&self) -> [u8; 32] {
        Sha256::digest(self.body().as_bytes()).into()
    }

    pub fn to_text(&self) -> String {
        let body = self.body();
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        format!("{body}checksum={digest}\n")
    }

    pub fn from_text(text: &str) -> Result<Self, ManifestError> {
        let mut values: Vec<String> = Vec::new();
        let mut checksum_line: Option<String> = None;
        let mut body_end = 0;
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ManifestError::BadLine(idx + 1))?;
            if key == "checksum" {
                checksum_line = Some(value.to_string());
                break;
            }
            if values.len() >= KEYS.len() || key != KEYS[values.len()] {
                return Err(ManifestError::UnexpectedKey(key.to_string()));
            }
            values.push(value.to_string());
            body_end += line.len() + 1;
        }
        let claimed = checksum_line.ok_or(ManifestError::MissingChecksum)?;
        if values.len() != KEYS.len() {
            return Err(ManifestError::MissingKey(KEYS[values.len()]));
        }
        let actual = hex::encode(Sha256::digest(&text.as_bytes()[..body_end]));
        if claimed != actual {
            return Err(ManifestError::ChecksumMismatch);
        }

        fn parse<T: std::str::FromStr>(key: &'static str, value: &str) -> Result<T, ManifestError> {
            value.parse().map_err(|_| ManifestError::BadValue {
                key,
                value: value.to_string(),
            })
        }

        let format_version: u32 = parse("format_version", &values[0])?;
        if format_version != FORMAT_VERSION {
            return Err(ManifestError::BadVersion(format_version));
        }
        let mode: CodeMode = values[1]
            .parse()
            .map_err(|_| ManifestError::BadValue {
                key: "mode",
                value: values[1].clone(),
            })?;
        let mut points = Vec::new();
        if !values[11].is_empty() {
            for part in values[11].split(',') {
                points.push(parse("points", part)?);
            }
        }
        let digest_bytes = hex::decode(&values[12]).map_err(|_| ManifestError::BadValue {
            key: "content_sha256",
            value: values[12].clone(),
        })?;
        let content_sha256: [u8; 32] =
            digest_bytes
                .try_into()
                .map_err(|_| ManifestError::BadValue {
                    key: "content_sha256",
                    value: values[12].clone(),
                })?;
        Ok(Manifest {
            mode,
            n: parse("n", &values[2])?,
            k: parse("k", &values[3])?,
            d: parse("d", &values[4])?,
            beta: parse("beta", &values[5])?,
            q: parse("q", &values[6])?,
            ell: parse("ell", &values[7])?,
            ell_prime: parse("ell_prime", &values[8])?,
            stripes: parse("stripes", &values[9])?,
            original_len: parse("original_len", &values[10])?,
            points,
            content_sha256,
        })
    }

    pub fn code_params(&self) -> Result<CodeParams, ManifestError> {
        let build = match self.mode {
            CodeMode::Mbr => mbr_params,
            CodeMode::Msr => msr_params,
        };
        build(self.n, self.k, self.d, self.beta).map_err(|e| ManifestError::BadParams(e.to_string()))
    }

    /// Rebuilds the exact code instance this manifest describes.
    pub fn code(&self) -> Result<SecureCode, ManifestError> {
        let params = self.code_params()?;
        let q = FieldModulus::new(self.q).map_err(|e| ManifestError::BadParams(e.to_string()))?;
        let points = self.points.iter().map(|&p| q.element(p)).collect();
        SecureCode::new_on_points(&params, self.ell, self.ell_prime, q, points)
            .map_err(|e| ManifestError::BadParams(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        Manifest {
            mode: CodeMode::Mbr,
            n: 6,
            k: 3,
            d: 4,
            beta: 1,
            q: 257,
            ell: 1,
            ell_prime: 0,
            stripes: 10,
            original_len: 42,
            points: vec![1, 2, 3, 4, 5, 6],
            content_sha256: [7; 32],
        }
    }

    #[test]
    fn round_trip() {
        let m = sample();
        let text = m.to_text();
        assert!(text.ends_with('\n'));
        assert_eq!(Manifest::from_text(&text).unwrap(), m);
    }

    #[test]
    fn checksum_detects_tampering() {
        let text = sample().to_text().replace("n=6", "n=7");
        assert!(matches!(
            Manifest::from_text(&text),
            Err(ManifestError::ChecksumMismatch)
        ));
    }

    #[test]
    fn missing_checksum_line() {
        let text = sample().body();
        assert!(matches!(
            Manifest::from_text(&text),
            Err(ManifestError::MissingChecksum)
        ));
    }

    #[test]
    fn rebuilds_code() {
        let m = sample();
        let code = m.code().unwrap();
        assert_eq!(code.params().n, 6);
        assert_eq!(code.secrecy().ell, 1);
        assert_eq!(code.secrecy().b_s, 5);
        let pts: Vec<u64> = code
            .base_encoding()
            .points()
            .iter()
            .map(|p| p.value())
            .collect();
        assert_eq!(pts, m.points);
    }

    #[test]
    fn rejects_unknown_or_reordered_keys() {
        let text = sample().to_text().replace("mode=", "modus=");
        assert!(matches!(
            Manifest::from_text(&text),
            Err(ManifestError::UnexpectedKey(_))
        ));
    }
}
