//! PDB fixed-column ingestion, reduced to one Cα point per residue.
//!
//! Selection rules:
//! - only `ATOM` records (no `HETATM`, so waters and ligands never appear);
//! - only the first `MODEL` block of multi-model files;
//! - atom name `CA`, altloc blank or the configured altloc (default `A`);
//! - the first accepted Cα of a residue position wins;
//! - all chains of the selected model, in file order.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("failed to read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed ATOM record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("no CA atoms found in structure {0}")]
    NoCaAtoms(String),
}

/// One residue reduced to its label and Cα coordinate (angstroms).
#[derive(Clone, Debug, PartialEq)]
pub struct Residue {
    pub label: String,
    pub chain_id: char,
    pub seq_number: i32,
    pub insertion_code: Option<char>,
    pub ca_position: [f64; 3],
}

impl Residue {
    /// The residue position key `(chain, seq_number, insertion code)`.
    pub fn key(&self) -> (char, i32, Option<char>) {
        (self.chain_id, self.seq_number, self.insertion_code)
    }
}

/// Counters describing what the parser skipped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub atom_records: usize,
    pub hetatm_skipped: usize,
    pub altloc_skipped: usize,
    /// ATOM/HETATM records ignored because they belong to a later model.
    pub later_model_records: usize,
    /// Residue positions that had ATOM records but no selected CA.
    pub residues_without_ca: usize,
    /// Extra CA records for an already-filled residue position.
    pub duplicate_ca: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureRecord {
    pub structure_id: String,
    pub residues: Vec<Residue>,
    pub source_path: String,
    pub stats: ParseStats,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IngestOptions {
    /// Alternate location accepted besides blank.
    pub altloc: char,
    /// Overrides the structure id derived from the file stem.
    pub structure_id: Option<String>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            altloc: 'A',
            structure_id: None,
        }
    }
}

/// Structure id used for a file: its stem, or the whole name if it has none.
pub fn structure_id_for_path(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn parse_pdb_file(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<StructureRecord, IngestError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            IngestError::FileNotFound(path.to_path_buf())
        } else {
            IngestError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    let id = options
        .structure_id
        .clone()
        .unwrap_or_else(|| structure_id_for_path(path));
    let mut record = parse_pdb_str(&text, &id, options)?;
    record.source_path = path.display().to_string();
    Ok(record)
}

/// Parses PDB text already in memory. `source_path` is left empty.
pub fn parse_pdb_str(
    text: &str,
    structure_id: &str,
    options: &IngestOptions,
) -> Result<StructureRecord, IngestError> {
    let mut residues: Vec<Residue> = Vec::new();
    let mut stats = ParseStats::default();
    let mut with_ca: HashSet<(char, i32, Option<char>)> = HashSet::new();
    let mut seen: HashSet<(char, i32, Option<char>)> = HashSet::new();
    let mut models_seen = 0usize;
    let mut past_first_model = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let record = line.get(..6).unwrap_or(line);
        match record.trim_end() {
            "MODEL" => {
                models_seen += 1;
                if models_seen > 1 {
                    past_first_model = true;
                }
                continue;
            }
            "ENDMDL" => {
                past_first_model = true;
                continue;
            }
            "HETATM" => {
                if past_first_model {
                    stats.later_model_records += 1;
                } else {
                    stats.hetatm_skipped += 1;
                }
                continue;
            }
            "ATOM" => {}
            _ => continue,
        }
        if past_first_model {
            stats.later_model_records += 1;
            continue;
        }
        stats.atom_records += 1;

        let atom = parse_atom_line(line, line_no)?;
        let key = (atom.chain_id, atom.seq_number, atom.insertion_code);
        seen.insert(key);
        if atom.name != "CA" {
            continue;
        }
        if atom.altloc != ' ' && atom.altloc != options.altloc {
            stats.altloc_skipped += 1;
            continue;
        }
        if !with_ca.insert(key) {
            stats.duplicate_ca += 1;
            continue;
        }
        residues.push(Residue {
            label: atom.res_name,
            chain_id: atom.chain_id,
            seq_number: atom.seq_number,
            insertion_code: atom.insertion_code,
            ca_position: atom.position,
        });
    }

    if residues.is_empty() {
        return Err(IngestError::NoCaAtoms(structure_id.to_string()));
    }
    stats.residues_without_ca = seen.len() - with_ca.len();
    Ok(StructureRecord {
        structure_id: structure_id.to_string(),
        residues,
        source_path: String::new(),
        stats,
    })
}

struct AtomLine {
    name: String,
    altloc: char,
    res_name: String,
    chain_id: char,
    seq_number: i32,
    insertion_code: Option<char>,
    position: [f64; 3],
}

fn column(line: &str, start: usize, end: usize) -> Option<&str> {
    // 1-based inclusive PDB columns; short lines yield what is present.
    let bytes = line.as_bytes();
    if start > bytes.len() {
        return Some("");
    }
    line.get(start - 1..end.min(bytes.len()))
}

fn column_char(line: &str, col: usize) -> char {
    line.as_bytes().get(col - 1).map(|&b| b as char).unwrap_or(' ')
}

fn parse_atom_line(line: &str, line_no: usize) -> Result<AtomLine, IngestError> {
    let malformed = |reason: &str| IngestError::MalformedRecord {
        line: line_no,
        reason: reason.to_string(),
    };
    if !line.is_ascii() {
        return Err(malformed("non-ASCII characters"));
    }
    if line.len() < 54 {
        return Err(malformed("record shorter than 54 columns"));
    }
    let name = column(line, 13, 16).unwrap_or("").trim().to_string();
    let res_name = column(line, 18, 20).unwrap_or("").trim().to_ascii_uppercase();
    if res_name.is_empty() {
        return Err(malformed("empty residue name"));
    }
    let seq_field = column(line, 23, 26).unwrap_or("").trim();
    let seq_number = seq_field
        .parse::<i32>()
        .map_err(|_| malformed(&format!("bad residue sequence number {seq_field:?}")))?;
    let insertion_code = match column_char(line, 27) {
        ' ' => None,
        c => Some(c),
    };
    let mut position = [0.0; 3];
    for (axis, slot) in position.iter_mut().enumerate() {
        let start = 31 + axis * 8;
        let field = column(line, start, start + 7).unwrap_or("").trim();
        let value = field
            .parse::<f64>()
            .map_err(|_| malformed(&format!("bad coordinate {field:?}")))?;
        if !value.is_finite() {
            return Err(malformed("non-finite coordinate"));
        }
        *slot = value;
    }
    Ok(AtomLine {
        name,
        altloc: column_char(line, 17),
        res_name,
        chain_id: column_char(line, 22),
        seq_number,
        insertion_code,
        position,
    })
}

/// Writes the residues back out as CA-only `ATOM` records.
///
/// Coordinates are written with three decimals, so a record parsed from a
/// PDB file survives `to_pdb_string` followed by [`parse_pdb_str`] unchanged.
pub fn to_pdb_string(record: &StructureRecord) -> String {
    let mut out = String::new();
    for (i, r) in record.residues.iter().enumerate() {
        let [x, y, z] = r.ca_position;
        let _ = writeln!(
            out,
            "ATOM  {:>5} {:<4}{}{:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}  1.00  0.00           C",
            (i + 1) % 100_000,
            " CA",
            ' ',
            r.label,
            r.chain_id,
            r.seq_number,
            r.insertion_code.unwrap_or(' '),
            x,
            y,
            z
        );
    }
    out.push_str("END\n");
    out
}
