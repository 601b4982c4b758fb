use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ingest::{frac_to_cart, AtomicConfiguration, Cell};
use crate::network::BondNetwork;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Xyz,
    LammpsDump,
    NetworkJson,
}

impl InputFormat {
    /// Guesses the format from the first non-blank line.
    pub fn detect(text: &str) -> InputFormat {
        let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
        if first.starts_with("ITEM:") {
            InputFormat::LammpsDump
        } else if first.starts_with('{') {
            InputFormat::NetworkJson
        } else {
            InputFormat::Xyz
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(line, format!("expected a number, found '{tok}'")))
}

/// Parses `1=Si,2=O`.
pub fn parse_species_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Mapping(format!("'{item}' is not of the form type=label")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Parses the first frame of a plain or extended XYZ file. A `Lattice="..."`
/// entry on the comment line sets the cell (periodic unless `pbc` says
/// otherwise). Atom lines start with `species x y z`; further columns are
/// ignored.
pub fn parse_xyz(text: &str) -> Result<AtomicConfiguration> {
    let mut lines = text.lines().enumerate();
    let (n, count_line) = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((i, l)) => {
                let n: usize = l
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(i + 1, format!("expected atom count, found '{}'", l.trim())))?;
                break (n, i + 1);
            }
            None => return Err(parse_err(1, "empty file")),
        }
    };
    let comment = lines.next().map(|(_, l)| l).unwrap_or("");
    let (cell, periodic) = parse_xyz_comment(comment, count_line + 1)?;
    let mut species = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let Some((i, l)) = lines.next() else {
            return Err(parse_err(
                count_line + 2 + species.len(),
                format!("expected {n} atoms, found {}", species.len()),
            ));
        };
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 4 {
            return Err(parse_err(i + 1, "atom line needs species and three coordinates"));
        }
        species.push(toks[0].to_string());
        positions.push([number(toks[1], i + 1)?, number(toks[2], i + 1)?, number(toks[3], i + 1)?]);
    }
    AtomicConfiguration::new(species, positions, cell, periodic)
}

fn parse_xyz_comment(comment: &str, line: usize) -> Result<(Option<Cell>, [bool; 3])> {
    let Some(value) = quoted_value(comment, "Lattice") else {
        return Ok((None, [false; 3]));
    };
    let v: Vec<f64> = value
        .split_whitespace()
        .map(|t| number(t, line))
        .collect::<Result<_>>()?;
    if v.len() != 9 {
        return Err(parse_err(line, "Lattice needs nine numbers"));
    }
    let cell = [[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]];
    let mut periodic = [true; 3];
    if let Some(pbc) = quoted_value(comment, "pbc") {
        let flags: Vec<&str> = pbc.split_whitespace().collect();
        if flags.len() != 3 {
            return Err(parse_err(line, "pbc needs three flags"));
        }
        for (p, f) in periodic.iter_mut().zip(flags) {
            *p = matches!(f, "T" | "t" | "True" | "true" | "1");
        }
    }
    Ok((Some(cell), periodic))
}

fn quoted_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    let lower = comment.to_ascii_lowercase();
    let start = lower.find(&format!("{}=", key.to_ascii_lowercase()))? + key.len() + 1;
    let rest = &comment[start..];
    if let Some(stripped) = rest.strip_prefix('"') {
        let end = stripped.find('"')?;
        Some(&stripped[..end])
    } else {
        Some(rest.split_whitespace().next().unwrap_or(""))
    }
}

/// Writes extended XYZ with full-precision coordinates.
pub fn write_xyz(cfg: &AtomicConfiguration) -> String {
    let mut out = format!("{}\n", cfg.len());
    if let Some(c) = &cfg.cell {
        let flag = |p: bool| if p { "T" } else { "F" };
        out.push_str(&format!(
            "Lattice=\"{} {} {} {} {} {} {} {} {}\" Properties=species:S:1:pos:R:3 pbc=\"{} {} {}\"\n",
            c[0][0],
            c[0][1],
            c[0][2],
            c[1][0],
            c[1][1],
            c[1][2],
            c[2][0],
            c[2][1],
            c[2][2],
            flag(cfg.periodic[0]),
            flag(cfg.periodic[1]),
            flag(cfg.periodic[2])
        ));
    } else {
        out.push('\n');
    }
    for (s, p) in cfg.species.iter().zip(&cfg.positions) {
        out.push_str(&format!("{s} {} {} {}\n", p[0], p[1], p[2]));
    }
    out
}

/// Parses the first frame of a LAMMPS text dump. Atoms are sorted by id;
/// `type` values are mapped through `species_map`, or an `element` column is
/// used when no map is given.
pub fn parse_lammps_dump(text: &str, species_map: Option<&BTreeMap<String, String>>) -> Result<AtomicConfiguration> {
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    let mut n_atoms: Option<usize> = None;
    let mut cell: Option<Cell> = None;
    let mut origin = [0.0; 3];
    let mut periodic = [true; 3];
    while i < lines.len() {
        let line = lines[i].trim();
        if line.is_empty() {
            i += 1;
            continue;
        }
        let Some(item) = line.strip_prefix("ITEM:") else {
            return Err(parse_err(i + 1, format!("expected an ITEM header, found '{line}'")));
        };
        let item = item.trim();
        if item.starts_with("TIMESTEP") {
            i += 2;
        } else if item.starts_with("NUMBER OF ATOMS") {
            let l = lines.get(i + 1).ok_or_else(|| parse_err(i + 2, "missing atom count"))?;
            n_atoms = Some(
                l.trim()
                    .parse()
                    .map_err(|_| parse_err(i + 2, format!("expected atom count, found '{}'", l.trim())))?,
            );
            i += 2;
        } else if let Some(rest) = item.strip_prefix("BOX BOUNDS") {
            let flags: Vec<&str> = rest.split_whitespace().collect();
            let triclinic = flags.first() == Some(&"xy");
            let bflags = if triclinic { &flags[3.min(flags.len())..] } else { &flags[..] };
            if bflags.len() == 3 {
                for (p, f) in periodic.iter_mut().zip(bflags) {
                    *p = *f == "pp";
                }
            }
            let mut rows = [[0.0; 3]; 3];
            for (k, row) in rows.iter_mut().enumerate() {
                let ln = i + 2 + k;
                let l = lines.get(ln - 1).ok_or_else(|| parse_err(ln, "missing box bounds"))?;
                let toks: Vec<&str> = l.split_whitespace().collect();
                let want = if triclinic { 3 } else { 2 };
                if toks.len() < want {
                    return Err(parse_err(ln, format!("box bounds line needs {want} numbers")));
                }
                row[0] = number(toks[0], ln)?;
                row[1] = number(toks[1], ln)?;
                if triclinic {
                    row[2] = number(toks[2], ln)?;
                }
            }
            let (xy, xz, yz) = (rows[0][2], rows[1][2], rows[2][2]);
            let xlo = rows[0][0] - 0f64.min(xy).min(xz).min(xy + xz);
            let xhi = rows[0][1] - 0f64.max(xy).max(xz).max(xy + xz);
            let ylo = rows[1][0] - 0f64.min(yz);
            let yhi = rows[1][1] - 0f64.max(yz);
            let (zlo, zhi) = (rows[2][0], rows[2][1]);
            origin = [xlo, ylo, zlo];
            cell = Some([[xhi - xlo, 0.0, 0.0], [xy, yhi - ylo, 0.0], [xz, yz, zhi - zlo]]);
            i += 4;
        } else if let Some(rest) = item.strip_prefix("ATOMS") {
            let n = n_atoms.ok_or_else(|| parse_err(i + 1, "ATOMS before NUMBER OF ATOMS"))?;
            let cols: Vec<&str> = rest.split_whitespace().collect();
            return read_atoms(&lines, i + 1, n, &cols, cell, origin, periodic, species_map);
        } else {
            return Err(parse_err(i + 1, format!("unsupported item '{item}'")));
        }
    }
    Err(parse_err(lines.len(), "no ATOMS section"))
}

#[allow(clippy::too_many_arguments)]
fn read_atoms(
    lines: &[&str],
    start: usize,
    n: usize,
    cols: &[&str],
    cell: Option<Cell>,
    origin: [f64; 3],
    periodic: [bool; 3],
    species_map: Option<&BTreeMap<String, String>>,
) -> Result<AtomicConfiguration> {
    let col = |name: &str| cols.iter().position(|c| *c == name);
    let header_line = start;
    let id_col = col("id").ok_or_else(|| parse_err(header_line, "ATOMS header lacks an id column"))?;
    let (xyz, scaled) = if let (Some(x), Some(y), Some(z)) = (col("x"), col("y"), col("z")) {
        ([x, y, z], false)
    } else if let (Some(x), Some(y), Some(z)) = (col("xu"), col("yu"), col("zu")) {
        ([x, y, z], false)
    } else if let (Some(x), Some(y), Some(z)) = (col("xs"), col("ys"), col("zs")) {
        ([x, y, z], true)
    } else if let (Some(x), Some(y), Some(z)) = (col("xsu"), col("ysu"), col("zsu")) {
        ([x, y, z], true)
    } else {
        return Err(parse_err(header_line, "ATOMS header lacks coordinate columns"));
    };
    let type_col = col("type");
    let element_col = col("element");
    if scaled && cell.is_none() {
        return Err(parse_err(header_line, "scaled coordinates without box bounds"));
    }
    let mut atoms: Vec<(i64, String, [f64; 3])> = Vec::with_capacity(n);
    for k in 0..n {
        let ln = start + 1 + k;
        let l = lines
            .get(ln - 1)
            .ok_or_else(|| parse_err(ln, format!("expected {n} atoms, found {k}")))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < cols.len() {
            return Err(parse_err(ln, format!("expected {} columns, found {}", cols.len(), toks.len())));
        }
        let id: i64 = toks[id_col]
            .parse()
            .map_err(|_| parse_err(ln, format!("bad atom id '{}'", toks[id_col])))?;
        let label = match (species_map, type_col, element_col) {
            (Some(map), Some(t), _) => map
                .get(toks[t])
                .cloned()
                .ok_or_else(|| Error::Mapping(format!("atom type {} (line {ln}) has no species", toks[t])))?,
            (None, _, Some(e)) => toks[e].to_string(),
            (Some(_), None, Some(e)) => toks[e].to_string(),
            _ => {
                return Err(Error::Mapping(
                    "dump has no element column; pass a species map such as 1=Si,2=O".into(),
                ))
            }
        };
        let v = [number(toks[xyz[0]], ln)?, number(toks[xyz[1]], ln)?, number(toks[xyz[2]], ln)?];
        let pos = if scaled {
            frac_to_cart(cell.as_ref().unwrap(), v)
        } else {
            [v[0] - origin[0], v[1] - origin[1], v[2] - origin[2]]
        };
        atoms.push((id, label, pos));
    }
    atoms.sort_by_key(|a| a.0);
    if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(parse_err(start, "duplicate atom id"));
    }
    let species = atoms.iter().map(|a| a.1.clone()).collect();
    let positions = atoms.iter().map(|a| a.2).collect();
    AtomicConfiguration::new(species, positions, cell, if cell.is_some() { periodic } else { [false; 3] })
}

/// Parses XYZ or LAMMPS dump text, detected from the first line.
pub fn parse_configuration(text: &str, species_map: Option<&BTreeMap<String, String>>) -> Result<AtomicConfiguration> {
    match InputFormat::detect(text) {
        InputFormat::LammpsDump => parse_lammps_dump(text, species_map),
        InputFormat::Xyz => parse_xyz(text),
        InputFormat::NetworkJson => Err(invalid("network JSON holds no coordinates")),
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    species: Vec<String>,
    bonds: Vec<(u32, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cell: Option<Cell>,
}

/// Edge-list JSON: `{"species": [...], "bonds": [[a, b], ...]}` plus
/// optional positions and cell.
pub fn network_to_json(net: &BondNetwork) -> Result<String> {
    let file = NetworkFile {
        species: (0..net.len() as u32).map(|a| net.species_label(a).to_string()).collect(),
        bonds: net.bonds().to_vec(),
        positions: net.positions().map(<[_]>::to_vec),
        cell: net.cell().copied(),
    };
    let mut s = serde_json::to_string(&file)?;
    s.push('\n');
    Ok(s)
}

pub fn network_from_json(text: &str) -> Result<BondNetwork> {
    let file: NetworkFile = serde_json::from_str(text)?;
    let mut net = BondNetwork::new(&file.species, file.bonds.into_iter().map(|(a, b)| (a as usize, b as usize)))?;
    if let Some(p) = file.positions {
        net = net.with_positions(p)?;
    }
    if let Some(c) = file.cell {
        net = net.with_cell(c);
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_xyz() {
        let c = parse_xyz("2\nwater-ish\nSi 0 0 0\nO 1.6 0 0\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.cell, None);
        assert_eq!(c.species, vec!["Si", "O"]);
        assert_eq!(c.positions[1], [1.6, 0.0, 0.0]);
    }

    #[test]
    fn xyz_errors_carry_line_numbers() {
        match parse_xyz("3\nc\nSi 0 0 0\nO 1 x 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        match parse_xyz("3\nc\nSi 0 0 0\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn extended_xyz_roundtrip() {
        let cfg = AtomicConfiguration::new(
            vec!["Si".into(), "O".into()],
            vec![[0.1, 0.2, 0.30000000000000004], [1.0 / 3.0, 2.0, 3.0]],
            Some([[5.0, 0.0, 0.0], [-2.5, 4.330127018922193, 0.0], [0.0, 0.0, 5.4]]),
            [true, true, false],
        )
        .unwrap();
        let text = write_xyz(&cfg);
        assert_eq!(parse_xyz(&text).unwrap(), cfg);
    }

    const DUMP: &str = "ITEM: TIMESTEP\n0\nITEM: NUMBER OF ATOMS\n3\nITEM: BOX BOUNDS pp pp pp\n0 10\n0 10\n0 10\nITEM: ATOMS id type x y z\n3 2 9.5 0 0\n1 1 0.1 0 0\n2 2 1.7 0 0\n";

    #[test]
    fn orthorhombic_dump() {
        let map = parse_species_map("1=Si,2=O").unwrap();
        let c = parse_lammps_dump(DUMP, Some(&map)).unwrap();
        assert_eq!(c.species, vec!["Si", "O", "O"]);
        assert_eq!(c.positions[0], [0.1, 0.0, 0.0]);
        assert_eq!(c.periodic, [true; 3]);
        assert_eq!(c.cell.unwrap()[2][2], 10.0);
        assert_eq!(InputFormat::detect(DUMP), InputFormat::LammpsDump);
    }

    #[test]
    fn dump_mapping_errors() {
        let map = parse_species_map("1=Si").unwrap();
        assert!(matches!(parse_lammps_dump(DUMP, Some(&map)), Err(Error::Mapping(_))));
        assert!(matches!(parse_lammps_dump(DUMP, None), Err(Error::Mapping(_))));
    }

    #[test]
    fn scaled_triclinic_dump() {
        let text = "ITEM: TIMESTEP\n5\nITEM: NUMBER OF ATOMS\n1\nITEM: BOX BOUNDS xy xz yz pp pp ff\n0 12 2\n0 10 0\n0 8 0\nITEM: ATOMS id element xs ys zs\n1 Si 0.5 0.5 0.5\n";
        let c = parse_lammps_dump(text, None).unwrap();
        let cell = c.cell.unwrap();
        assert_eq!(cell[0], [10.0, 0.0, 0.0]);
        assert_eq!(cell[1], [2.0, 10.0, 0.0]);
        assert_eq!(c.periodic, [true, true, false]);
        assert_eq!(c.positions[0], [6.0, 5.0, 4.0]);
    }

    #[test]
    fn network_json_roundtrip() {
        let net = BondNetwork::new(&["Si", "O", "Si"], [(0, 1), (1, 2)]).unwrap();
        let text = network_to_json(&net).unwrap();
        assert_eq!(InputFormat::detect(&text), InputFormat::NetworkJson);
        let back = network_from_json(&text).unwrap();
        assert_eq!(back.bonds(), net.bonds());
        assert_eq!(back.species_label(1), "O");
    }
}
