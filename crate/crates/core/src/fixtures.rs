//! Reference matrices for O₄₀ (glue basis blocks, a Gram matrix and two
//! automorphisms), shipped with a SHA-256 manifest.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{parse_int_matrix, IntMatrix};

const FILES: [&str; 5] = ["b1.mat", "b3.mat", "gram_o40.mat", "g1.mat", "g2.mat"];

const EMBEDDED: [(&str, &str); 5] = [
    ("b1.mat", include_str!("../fixtures/b1.mat")),
    ("b3.mat", include_str!("../fixtures/b3.mat")),
    ("gram_o40.mat", include_str!("../fixtures/gram_o40.mat")),
    ("g1.mat", include_str!("../fixtures/g1.mat")),
    ("g2.mat", include_str!("../fixtures/g2.mat")),
];

const EMBEDDED_SUMS: &str = include_str!("../fixtures/SHA256SUMS");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixtures {
    pub b1: IntMatrix,
    pub b3: IntMatrix,
    pub gram_o40: IntMatrix,
    pub g1: IntMatrix,
    pub g2: IntMatrix,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse_sums(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.nth(1)?.to_string(), l.split_whitespace().next()?.to_string()))
        })
        .collect()
}

fn expect_shape(name: &str, m: &IntMatrix, n: usize) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::Parse(format!("{name}: expected {n}×{n}, got {}×{}", m.rows(), m.cols())));
    }
    Ok(())
}

impl Fixtures {
    /// The copies compiled into the library.
    pub fn embedded() -> Result<Self> {
        let texts: BTreeMap<String, String> =
            EMBEDDED.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Self::from_texts(&texts, EMBEDDED_SUMS)
    }

    /// Loads the five matrices from `dir`. Checksums come from
    /// `dir/SHA256SUMS` when present and from the built-in manifest otherwise.
    pub fn load_from_dir(dir: &Path) -> Result<Self> {
        let mut texts = BTreeMap::new();
        for f in FILES {
            texts.insert(f.to_string(), std::fs::read_to_string(dir.join(f))?);
        }
        let sums = match std::fs::read_to_string(dir.join("SHA256SUMS")) {
            Ok(s) => s,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => EMBEDDED_SUMS.to_string(),
            Err(e) => return Err(e.into()),
        };
        Self::from_texts(&texts, &sums)
    }

    fn from_texts(texts: &BTreeMap<String, String>, sums: &str) -> Result<Self> {
        let sums = parse_sums(sums);
        for f in FILES {
            let text = &texts[f];
            let want = sums.get(f).ok_or_else(|| Error::FixtureChecksum(format!("{f} (not in manifest)")))?;
            if &sha256_hex(text.as_bytes()) != want {
                return Err(Error::FixtureChecksum(f.to_string()));
            }
        }
        let m = |f: &str| parse_int_matrix(&texts[f]);
        let fx = Self { b1: m("b1.mat")?, b3: m("b3.mat")?, gram_o40: m("gram_o40.mat")?, g1: m("g1.mat")?, g2: m("g2.mat")? };
        expect_shape("b1", &fx.b1, 20)?;
        expect_shape("b3", &fx.b3, 10)?;
        expect_shape("gram_o40", &fx.gram_o40, 40)?;
        expect_shape("g1", &fx.g1, 40)?;
        expect_shape("g2", &fx.g2, 40)?;
        Ok(fx)
    }

    /// `B = [[I₂₀, B₁], [0, B₂]]` with `B₂ = [[3I₁₀, B₃], [0, 21I₁₀]]`.
    pub fn reference_basis(&self) -> IntMatrix {
        let mut b = IntMatrix::zeros(40, 40);
        for i in 0..20 {
            b[(i, i)] = 1.into();
            for j in 0..20 {
                b[(i, 20 + j)] = self.b1[(i, j)].clone();
            }
        }
        for i in 0..10 {
            b[(20 + i, 20 + i)] = 3.into();
            b[(30 + i, 30 + i)] = 21.into();
            for j in 0..10 {
                b[(20 + i, 30 + j)] = self.b3[(i, j)].clone();
            }
        }
        b
    }

    /// Names and texts of the embedded files, for writing a fixture directory.
    pub fn embedded_files() -> Vec<(&'static str, &'static str)> {
        let mut v = EMBEDDED.to_vec();
        v.push(("SHA256SUMS", EMBEDDED_SUMS));
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_fixtures_load() {
        let fx = Fixtures::embedded().unwrap();
        assert_eq!(fx.b1.rows(), 20);
        assert!(fx.gram_o40.is_symmetric());
        // first row of B₁ as printed
        let first: Vec<i64> = fx.b1.row(0).iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(first, vec![0, 2, 1, 1, 2, 2, 2, 2, 1, 2, 4, 20, 16, 10, 4, 10, 2, 8, 16, 7]);
    }

    #[test]
    fn reference_basis_shape() {
        let b = Fixtures::embedded().unwrap().reference_basis();
        assert_eq!(b[(0, 0)], 1.into());
        assert_eq!(b[(25, 25)], 3.into());
        assert_eq!(b[(39, 39)], 21.into());
        assert_eq!(b[(39, 0)], 0.into());
    }

    #[test]
    fn corrupted_directory_is_rejected() {
        let dir = std::env::temp_dir().join(format!("lat40-fx-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for (name, text) in Fixtures::embedded_files() {
            std::fs::write(dir.join(name), text).unwrap();
        }
        assert!(Fixtures::load_from_dir(&dir).is_ok());
        let b1 = std::fs::read_to_string(dir.join("b1.mat")).unwrap().replacen("0 2 1", "0 2 2", 1);
        std::fs::write(dir.join("b1.mat"), b1).unwrap();
        assert!(matches!(Fixtures::load_from_dir(&dir), Err(Error::FixtureChecksum(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
