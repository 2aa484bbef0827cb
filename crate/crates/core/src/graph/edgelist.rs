use std::io::{BufRead, Write};

use rustc_hash::FxHashSet;

use super::generate::EdgeList;
use crate::error::{Error, Result};

/// `# nodes <N> edges <E> directed <0|1>`
pub fn header_line(node_count: u64, edge_count: u64, directed: bool) -> String {
    format!("# nodes {node_count} edges {edge_count} directed {}\n", u8::from(directed))
}

fn parse_header(line: &str) -> Option<(u64, u64, bool)> {
    let mut it = line.trim_start_matches('#').split_whitespace();
    let mut field = |name: &str| -> Option<u64> {
        (it.next()? == name).then_some(())?;
        it.next()?.parse().ok()
    };
    let nodes = field("nodes")?;
    let edges = field("edges")?;
    let directed = match field("directed")? {
        0 => false,
        1 => true,
        _ => return None,
    };
    Some((nodes, edges, directed))
}

/// Appends `src<sep>dst\n`.
#[inline]
pub(crate) fn push_edge(out: &mut Vec<u8>, (src, dst): (u64, u64), sep: u8) {
    let mut b = itoa::Buffer::new();
    out.extend_from_slice(b.format(src).as_bytes());
    out.push(sep);
    out.extend_from_slice(b.format(dst).as_bytes());
    out.push(b'\n');
}

/// Length in bytes of an edge line.
#[inline]
pub(crate) fn edge_line_len((src, dst): (u64, u64)) -> u64 {
    let mut b = itoa::Buffer::new();
    (b.format(src).len() + b.format(dst).len() + 2) as u64
}

/// Writes the header followed by one tab-separated pair per line.
pub fn write_edge_list(graph: &EdgeList, sink: &mut dyn Write) -> Result<u64> {
    let header = header_line(graph.node_count, graph.edge_count(), graph.directed);
    write_lines(graph, header.as_bytes(), b'\t', sink)
}

/// Writes `src,dst` CSV with a header row.
pub fn write_edge_csv(graph: &EdgeList, sink: &mut dyn Write) -> Result<u64> {
    write_lines(graph, b"src,dst\n", b',', sink)
}

fn write_lines(graph: &EdgeList, header: &[u8], sep: u8, sink: &mut dyn Write) -> Result<u64> {
    let mut buf = Vec::with_capacity(1 << 16);
    buf.extend_from_slice(header);
    let mut written = 0u64;
    for (i, &e) in graph.edges.iter().enumerate() {
        push_edge(&mut buf, e, sep);
        if buf.len() >= 1 << 16 {
            sink.write_all(&buf)
                .map_err(|err| Error::io_at(format!("writing edge {i}"), err))?;
            written += buf.len() as u64;
            buf.clear();
        }
    }
    sink.write_all(&buf)
        .map_err(|err| Error::io_at("writing edge list", err))?;
    Ok(written + buf.len() as u64)
}

/// Reads an edge list: `#` lines are comments except a header in this
/// crate's layout; every other non-empty line is two whitespace-separated ids.
///
/// Without a header the node count is one past the largest id and
/// directedness comes from `directed_hint` (default directed). Undirected
/// edges are canonicalised to `(min, max)`; repeated edges are dropped.
pub fn read_edge_list(reader: impl BufRead, directed_hint: Option<bool>) -> Result<EdgeList> {
    let mut header = None;
    let mut raw = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io_at(format!("reading line {}", lineno + 1), e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if header.is_none() {
                header = parse_header(line);
            }
            continue;
        }
        let mut parts = line.split(|c: char| c.is_whitespace() || c == ',');
        let mut id = || -> Option<u64> { parts.find(|p| !p.is_empty())?.parse().ok() };
        match (id(), id()) {
            (Some(s), Some(d)) => raw.push((s, d)),
            _ => {
                return Err(Error::Format(format!(
                    "line {}: expected two node ids, got {line:?}",
                    lineno + 1
                )))
            }
        }
    }

    let directed = header.map(|h| h.2).or(directed_hint).unwrap_or(true);
    let node_count = match header {
        Some((n, _, _)) => n,
        None => raw.iter().map(|&(s, d)| s.max(d) + 1).max().unwrap_or(0),
    };
    if let Some((_, e, _)) = header {
        if e != raw.len() as u64 {
            return Err(Error::Format(format!(
                "header declares {e} edges but {} were read",
                raw.len()
            )));
        }
    }
    let mut seen = FxHashSet::default();
    let edges = raw
        .into_iter()
        .map(|(s, d)| if !directed && s > d { (d, s) } else { (s, d) })
        .filter(|e| seen.insert(*e))
        .collect();
    EdgeList::new(node_count, directed, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_header() {
        let g = EdgeList::new(5, false, vec![(0, 1), (1, 4), (2, 2)]).unwrap();
        let mut out = Vec::new();
        write_edge_list(&g, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out.clone()).unwrap(),
            "# nodes 5 edges 3 directed 0\n0\t1\n1\t4\n2\t2\n"
        );
        assert_eq!(read_edge_list(&out[..], None).unwrap(), g);
    }

    #[test]
    fn headerless_snap_style_input() {
        let text = "# Directed graph: web.txt\n# FromNodeId\tToNodeId\n0\t11\n11 3\n\n3\t0\n";
        let g = read_edge_list(text.as_bytes(), None).unwrap();
        assert_eq!(g.node_count, 12);
        assert!(g.directed);
        assert_eq!(g.edges, vec![(0, 11), (11, 3), (3, 0)]);

        let u = read_edge_list("1 0\n0 1\n".as_bytes(), Some(false)).unwrap();
        assert_eq!(u.edges, vec![(0, 1)]);
    }

    #[test]
    fn malformed_inputs() {
        assert!(read_edge_list("0\tx\n".as_bytes(), None).is_err());
        assert!(read_edge_list("# nodes 2 edges 1 directed 1\n0\t5\n".as_bytes(), None).is_err());
        assert!(read_edge_list("# nodes 9 edges 2 directed 1\n0\t5\n".as_bytes(), None).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = EdgeList::new(2, true, vec![(0, 1)]).unwrap();
        let mut out = Vec::new();
        write_edge_csv(&g, &mut out).unwrap();
        assert_eq!(out, b"src,dst\n0,1\n");
        assert_eq!(edge_line_len((10, 7)), 5);
    }
}
