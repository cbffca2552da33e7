//! Plain-text chain files.
//!
//! ```text
//! # meetwalk chain
//! version 1
//! n 4
//! family hypercube
//! param d 2
//! labels a b c d
//! rows 8
//! 0 1 5.0000000000000000e-1
//! ...
//! end
//! ```
//!
//! `labels` and `param` lines are optional. Probabilities are written with 17
//! significant digits so that reading a file back reproduces every entry bit
//! for bit.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use super::{ChainSpec, Family};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub fn to_string(chain: &ChainSpec) -> String {
    let mut s = String::new();
    s.push_str("# meetwalk chain\n");
    s.push_str(&format!("version {FORMAT_VERSION}\n"));
    s.push_str(&format!("n {}\n", chain.n()));
    s.push_str(&format!("family {}\n", chain.family().name()));
    for (k, v) in chain.family().params() {
        s.push_str(&format!("param {k} {v}\n"));
    }
    if let Some(labels) = chain.labels() {
        s.push_str("labels");
        for l in labels {
            s.push(' ');
            s.push_str(l);
        }
        s.push('\n');
    }
    s.push_str(&format!("rows {}\n", chain.nnz()));
    for x in 0..chain.n() {
        for &(y, p) in chain.row(x) {
            s.push_str(&format!("{x} {y} {p:.16e}\n"));
        }
    }
    s.push_str("end\n");
    s
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn from_str(text: &str) -> Result<ChainSpec> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut version = None;
    let mut n: Option<usize> = None;
    let mut family_name: Option<String> = None;
    let mut params: BTreeMap<String, String> = BTreeMap::new();
    let mut labels = None;
    let mut last_line = 0;

    let mut rows_header = None;
    for (ln, line) in lines.by_ref() {
        last_line = ln;
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let one = |field: &str| -> Result<&str> {
            match rest.as_slice() {
                [v] => Ok(v),
                _ => Err(perr(ln, format!("field `{field}` takes exactly one value"))),
            }
        };
        match key {
            "version" => {
                let v: u32 = one("version")?.parse().map_err(|_| perr(ln, "field `version` is not an integer"))?;
                if v != FORMAT_VERSION {
                    return Err(Error::VersionMismatch { found: v, expected: FORMAT_VERSION });
                }
                version = Some(v);
            }
            "n" => n = Some(one("n")?.parse().map_err(|_| perr(ln, "field `n` is not an integer"))?),
            "family" => family_name = Some(one("family")?.to_string()),
            "param" => match rest.as_slice() {
                [k, v] => {
                    params.insert(k.to_string(), v.to_string());
                }
                _ => return Err(perr(ln, "field `param` takes a name and a value")),
            },
            "labels" => labels = Some(rest.iter().map(|s| s.to_string()).collect::<Vec<_>>()),
            "rows" => {
                let count: usize = one("rows")?.parse().map_err(|_| perr(ln, "field `rows` is not an integer"))?;
                rows_header = Some(count);
                break;
            }
            other => return Err(perr(ln, format!("unknown field `{other}`"))),
        }
    }
    if version.is_none() {
        return Err(perr(last_line, "missing field `version`"));
    }
    let n = n.ok_or_else(|| perr(last_line, "missing field `n`"))?;
    let family_name = family_name.ok_or_else(|| perr(last_line, "missing field `family`"))?;
    let count = rows_header.ok_or_else(|| perr(last_line, "missing field `rows`"))?;

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..count {
        let Some((ln, line)) = lines.next() else {
            return Err(perr(last_line, format!("missing field `rows`: expected {count} entries, found {i}")));
        };
        last_line = ln;
        let f: Vec<&str> = line.split_whitespace().collect();
        let [x, y, p] = f.as_slice() else {
            return Err(perr(ln, "row entry must be `state target probability`"));
        };
        let x: usize = x.parse().map_err(|_| perr(ln, "row state is not an integer"))?;
        let y: usize = y.parse().map_err(|_| perr(ln, "row target is not an integer"))?;
        let p: f64 = p.parse().map_err(|_| perr(ln, "row probability is not a number"))?;
        if x >= n || y >= n {
            return Err(perr(ln, format!("row entry ({x}, {y}) out of range for n = {n}")));
        }
        rows[x].push((y, p));
    }
    match lines.next() {
        Some((_, "end")) => {}
        Some((ln, other)) => return Err(perr(ln, format!("expected `end`, found `{other}`"))),
        None => return Err(perr(last_line, "missing field `end`")),
    }

    let family = parse_family(&family_name, &params, last_line)?;
    ChainSpec::from_rows(rows, labels, family)
}

fn parse_family(name: &str, params: &BTreeMap<String, String>, line: usize) -> Result<Family> {
    let int = |k: &str| -> Result<usize> {
        params
            .get(k)
            .ok_or_else(|| perr(line, format!("family `{name}` is missing param `{k}`")))?
            .parse()
            .map_err(|_| perr(line, format!("param `{k}` is not an integer")))
    };
    let real = |k: &str| -> Result<Option<f64>> {
        params.get(k).map(|v| v.parse().map_err(|_| perr(line, format!("param `{k}` is not a number")))).transpose()
    };
    Ok(match name {
        "complete" => Family::Complete { n: int("n")? },
        "cycle" => Family::Cycle { n: int("n")? },
        "directed-cycle" => Family::DirectedCycle { n: int("n")? },
        "hypercube" => Family::Hypercube { d: int("d")?, eps: real("eps")? },
        "trap" => Family::Trap {
            n: int("n")?,
            c: real("c")?.ok_or_else(|| perr(line, "family `trap` is missing param `c`"))?,
        },
        "custom" => Family::Custom,
        other => return Err(perr(line, format!("unknown family `{other}`"))),
    })
}

pub fn read(path: &Path) -> Result<ChainSpec> {
    from_str(&std::fs::read_to_string(path)?)
}

/// Write atomically: a temporary file in the target directory is renamed
/// into place.
pub fn write(chain: &ChainSpec, path: &Path) -> Result<()> {
    write_atomic(path, to_string(chain).as_bytes())
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_complete, build_cycle, build_hypercube, build_trap_graph};
    use proptest::prelude::*;

    #[test]
    fn roundtrip_families_bit_for_bit() {
        let chains = vec![
            build_complete(7).unwrap(),
            build_cycle(5, true).unwrap(),
            build_hypercube(3, Some(0.5)).unwrap(),
            build_hypercube(4, Some(0.01)).unwrap(),
            build_trap_graph(3, 12.0).unwrap().0,
        ];
        for c in chains {
            let back = from_str(&to_string(&c)).unwrap();
            assert_eq!(back, c);
            for x in 0..c.n() {
                for (a, b) in c.row(x).iter().zip(back.row(x)) {
                    assert_eq!(a.1.to_bits(), b.1.to_bits());
                }
            }
        }
    }

    #[test]
    fn labels_survive() {
        let c = ChainSpec::from_rows(
            vec![vec![(1, 1.0)], vec![(0, 0.25), (2, 0.75)], vec![(1, 1.0)]],
            Some(vec!["left".into(), "mid".into(), "right".into()]),
            Family::Custom,
        )
        .unwrap();
        assert_eq!(from_str(&to_string(&c)).unwrap(), c);
    }

    #[test]
    fn truncated_file_names_missing_field() {
        let text = to_string(&build_complete(3).unwrap());
        let head: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        let err = from_str(&head).unwrap_err().to_string();
        assert!(err.contains("missing field `rows`"), "{err}");

        let cut: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        let err = from_str(&cut).unwrap_err().to_string();
        assert!(err.contains("missing field `rows`") && err.contains("expected 6"), "{err}");

        let no_end = text.replace("end\n", "");
        assert!(from_str(&no_end).unwrap_err().to_string().contains("`end`"));

        let no_version = text.replace("version 1\n", "");
        assert!(from_str(&no_version).unwrap_err().to_string().contains("`version`"));
    }

    #[test]
    fn bad_row_sum_cites_row() {
        let text = "version 1\nn 2\nfamily custom\nrows 2\n0 1 0.9\n1 0 1.0\nend\n";
        let err = from_str(text).unwrap_err();
        assert!(matches!(err, Error::InvalidChain(_)));
        assert!(err.to_string().contains("row 0"), "{err}");
    }

    #[test]
    fn version_mismatch() {
        let text = "version 2\nn 2\nfamily custom\nrows 2\n0 1 1\n1 0 1\nend\n";
        assert!(matches!(from_str(text), Err(Error::VersionMismatch { found: 2, expected: 1 })));
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h3.chain");
        let c = build_hypercube(3, Some(0.5)).unwrap();
        write(&c, &path).unwrap();
        assert_eq!(read(&path).unwrap(), c);
    }

    proptest! {
        #[test]
        fn random_chains_roundtrip(weights in proptest::collection::vec(0.01f64..1.0, 9)) {
            // dense 3x3 chain with arbitrary positive rows
            let rows: Vec<Vec<f64>> = weights.chunks(3).map(|r| {
                let s: f64 = r.iter().sum();
                r.iter().map(|w| w / s).collect()
            }).collect();
            if let Ok(c) = ChainSpec::from_dense(&rows) {
                let back = from_str(&to_string(&c)).unwrap();
                prop_assert_eq!(back, c);
            }
        }
    }
}
