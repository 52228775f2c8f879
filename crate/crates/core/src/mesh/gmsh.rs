//! Gmsh MSH 2.2 ASCII reader and writer (tetrahedra only).

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use super::{Tet, TetMesh, Vec3};
use crate::error::{Error, Result};

const TET4: u32 = 4;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                self.line = i + 1;
                return Some(t);
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<&'a str> {
        self.next().ok_or_else(|| Error::Parse {
            line: self.line,
            msg: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }
}

fn num<T: std::str::FromStr>(lines: &Lines, tok: Option<&str>, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| lines.err(format!("could not read {what}")))
}

pub fn load_msh(path: impl AsRef<Path>) -> Result<TetMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_msh(&text)
}

pub fn parse_msh(text: &str) -> Result<TetMesh> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let mut nodes: Vec<Vec3> = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut raw_tets: Vec<([u64; 4], i32)> = Vec::new();
    let mut saw_format = false;
    let mut saw_nodes = false;
    let mut saw_elements = false;

    while let Some(header) = lines.next() {
        match header {
            "$MeshFormat" => {
                let l = lines.expect("format line")?;
                let mut it = l.split_whitespace();
                let version: f64 = num(&lines, it.next(), "format version")?;
                let file_type: u32 = num(&lines, it.next(), "file type")?;
                if !(2.0..3.0).contains(&version) {
                    return Err(lines.err(format!("unsupported MSH version {version}")));
                }
                if file_type != 0 {
                    return Err(lines.err("binary MSH files are not supported"));
                }
                if lines.expect("$EndMeshFormat")? != "$EndMeshFormat" {
                    return Err(lines.err("expected $EndMeshFormat"));
                }
                saw_format = true;
            }
            "$Nodes" => {
                let tok = lines.expect("node count")?;
                let n: usize = num(&lines, Some(tok), "node count")?;
                nodes.reserve(n);
                for _ in 0..n {
                    let l = lines.expect("node")?;
                    let mut it = l.split_whitespace();
                    let id: u64 = num(&lines, it.next(), "node id")?;
                    let x: f64 = num(&lines, it.next(), "x coordinate")?;
                    let y: f64 = num(&lines, it.next(), "y coordinate")?;
                    let z: f64 = num(&lines, it.next(), "z coordinate")?;
                    if node_index.insert(id, nodes.len()).is_some() {
                        return Err(lines.err(format!("duplicate node id {id}")));
                    }
                    nodes.push(Vec3::new(x, y, z));
                }
                if lines.expect("$EndNodes")? != "$EndNodes" {
                    return Err(lines.err("expected $EndNodes"));
                }
                saw_nodes = true;
            }
            "$Elements" => {
                let tok = lines.expect("element count")?;
                let n: usize = num(&lines, Some(tok), "element count")?;
                for _ in 0..n {
                    let l = lines.expect("element")?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    if toks.len() < 3 {
                        return Err(lines.err("truncated element record"));
                    }
                    let etype: u32 = num(&lines, Some(toks[1]), "element type")?;
                    let ntags: usize = num(&lines, Some(toks[2]), "tag count")?;
                    if etype != TET4 {
                        continue;
                    }
                    if toks.len() != 3 + ntags + 4 {
                        return Err(lines.err("tetrahedron record has wrong length"));
                    }
                    let region: i32 = if ntags > 0 {
                        num(&lines, Some(toks[3]), "physical tag")?
                    } else {
                        0
                    };
                    let mut ids = [0u64; 4];
                    for (slot, tok) in ids.iter_mut().zip(&toks[3 + ntags..]) {
                        *slot = num(&lines, Some(tok), "node reference")?;
                    }
                    raw_tets.push((ids, region));
                }
                if lines.expect("$EndElements")? != "$EndElements" {
                    return Err(lines.err("expected $EndElements"));
                }
                saw_elements = true;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                let end = format!("$End{}", &other[1..]);
                loop {
                    if lines.expect(&end)? == end {
                        break;
                    }
                }
            }
            other => return Err(lines.err(format!("unexpected line '{other}'"))),
        }
    }
    if !(saw_format && saw_nodes && saw_elements) {
        return Err(Error::Parse {
            line: lines.line,
            msg: "missing $MeshFormat, $Nodes or $Elements section".into(),
        });
    }

    let mut tets = Vec::with_capacity(raw_tets.len());
    for (ids, region) in raw_tets {
        let mut vertices = [0usize; 4];
        for (slot, id) in vertices.iter_mut().zip(ids) {
            *slot = *node_index.get(&id).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("element references unknown node {id}"),
            })?;
        }
        tets.push(Tet { vertices, region });
    }
    TetMesh::new(nodes, tets)
}

/// Writes vertices and tets (with their region as physical and elementary tag).
pub fn write_msh(mesh: &TetMesh, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;
    writeln!(out, "$Nodes\n{}", mesh.vertices.len())?;
    for (i, p) in mesh.vertices.iter().enumerate() {
        writeln!(out, "{} {:.17e} {:.17e} {:.17e}", i + 1, p.x, p.y, p.z)?;
    }
    writeln!(out, "$EndNodes\n$Elements\n{}", mesh.tets.len())?;
    for (i, t) in mesh.tets.iter().enumerate() {
        let v = t.vertices.map(|v| v + 1);
        writeln!(
            out,
            "{} 4 2 {} {} {} {} {} {}",
            i + 1,
            t.region,
            t.region,
            v[0],
            v[1],
            v[2],
            v[3]
        )?;
    }
    writeln!(out, "$EndElements")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::kuhn_cube;

    const TWO_TETS: &str = "$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
1
3 7 \"conductor\"
$EndPhysicalNames
$Nodes
5
10 0 0 0
20 1 0 0
30 0 1 0
40 0 0 1
50 1 1 1
$EndNodes
$Elements
3
1 2 2 7 1 10 20 30
2 4 2 7 1 10 20 30 40
3 4 2 9 2 20 30 40 50
$EndElements
";

    #[test]
    fn parses_two_tets_and_ignores_triangles() {
        let m = parse_msh(TWO_TETS).unwrap();
        assert_eq!(m.n_tets(), 2);
        assert_eq!(m.interior.len(), 1);
        assert_eq!(m.boundary.len(), 6);
        assert_eq!(m.tets[0].region, 7);
        assert_eq!(m.tets[1].region, 9);
    }

    #[test]
    fn round_trip() {
        let m = kuhn_cube(2);
        let mut buf = Vec::new();
        write_msh(&m, &mut buf).unwrap();
        let r = parse_msh(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(r.n_tets(), m.n_tets());
        assert_eq!(r.boundary.len(), m.boundary.len());
        assert_eq!(r.vertices, m.vertices);
    }

    #[test]
    fn malformed_inputs() {
        let truncated = &TWO_TETS[..TWO_TETS.find("$EndElements").unwrap()];
        assert!(matches!(parse_msh(truncated), Err(Error::Parse { .. })));
        let bad = TWO_TETS.replace("20 1 0 0", "20 1 zero 0");
        match parse_msh(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 11),
            other => panic!("expected parse error, got {other:?}"),
        }
        let unknown = TWO_TETS.replace("40 50", "40 60");
        assert!(matches!(parse_msh(&unknown), Err(Error::Parse { .. })));
        assert!(parse_msh("$MeshFormat\n4.1 0 8\n$EndMeshFormat\n").is_err());
    }
}
