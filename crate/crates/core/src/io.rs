//! Text file formats.
//!
//! Every format is line oriented with comma-separated fields. Blank lines
//! and comment lines starting with `#` are skipped, except for the header
//! comment carrying the `key=value` metadata the format needs; the header
//! must appear before the first data line. Numbers are written with the
//! shortest representation that parses back to the same value.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::bovw::{Codebook, DescriptorSet};
use crate::condense::BinAssignment;
use crate::error::{invalid_input, Error, Result};
use crate::multi::HistogramSeries;
use crate::series::{ChangePoint, ChangePointSet, LabelSeries, ScoreSeries};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Numbered, trimmed, non-blank lines.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn header_fields(line: &str) -> HashMap<&str, &str> {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|tok| tok.split_once('='))
        .collect()
}

fn number<T: std::str::FromStr>(raw: &str, what: &str, line: usize) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {raw:?}")))
}

fn real(raw: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = number(raw, what, line)?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} must be finite, got {raw:?}")));
    }
    Ok(v)
}

fn reals(fields: &[&str], line: usize) -> Result<Vec<f64>> {
    fields.iter().map(|f| real(f, "value", line)).collect()
}

/// Splits a file into its header values and data lines. The header is the
/// first comment line defining all of `keys`.
struct Sections<'a> {
    header: HashMap<&'a str, &'a str>,
    header_line: usize,
    data: Vec<(usize, &'a str)>,
}

impl Sections<'_> {
    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        number(self.header[key], key, self.header_line)
    }

    fn get_real(&self, key: &str) -> Result<f64> {
        real(self.header[key], key, self.header_line)
    }
}

fn sections<'a>(text: &'a str, keys: &[&str]) -> Result<Sections<'a>> {
    let mut header = None;
    let mut data = Vec::new();
    for (n, l) in lines(text) {
        if let Some(rest) = l.strip_prefix('#') {
            if header.is_none() {
                let h = header_fields(rest);
                if keys.iter().all(|k| h.contains_key(k)) {
                    header = Some((n, h));
                }
            }
            continue;
        }
        if header.is_none() {
            return Err(parse_err(n, format!("data before header defining {}", keys.join(", "))));
        }
        data.push((n, l));
    }
    let (header_line, header) = header.ok_or_else(|| parse_err(1, format!("missing header defining {}", keys.join(", "))))?;
    Ok(Sections {
        header,
        header_line,
        data,
    })
}

fn series_body(text: &str) -> Result<(Vec<(usize, f64)>, f64, f64)> {
    let s = sections(text, &["period", "origin"])?;
    let period = s.get_real("period")?;
    let origin = s.get_real("origin")?;
    let mut values = Vec::with_capacity(s.data.len());
    for (expected, &(n, l)) in s.data.iter().enumerate() {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(n, format!("expected index,value but found {} fields", fields.len())));
        }
        let idx: usize = number(fields[0], "index", n)?;
        if idx != expected {
            return Err(parse_err(n, format!("expected index {expected}, found {idx}")));
        }
        values.push((n, real(fields[1], "value", n)?));
    }
    if values.is_empty() {
        return Err(invalid_input("series file has no samples"));
    }
    Ok((values, period, origin))
}

pub fn parse_scores(text: &str) -> Result<ScoreSeries> {
    let (values, period, origin) = series_body(text)?;
    ScoreSeries::new(values.into_iter().map(|(_, v)| v).collect(), period, origin)
}

pub fn parse_labels(text: &str) -> Result<LabelSeries> {
    let (values, period, origin) = series_body(text)?;
    let labels = values
        .into_iter()
        .map(|(n, v)| match v {
            0.0 => Ok(0),
            1.0 => Ok(1),
            _ => Err(parse_err(n, format!("label must be 0 or 1, got {v}"))),
        })
        .collect::<Result<Vec<u8>>>()?;
    LabelSeries::new(labels, period, origin)
}

fn series_text(period: f64, origin: f64, values: impl Iterator<Item = String>) -> String {
    let mut out = format!("# period={period} origin={origin}\n");
    for (i, v) in values.enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

pub fn write_scores(s: &ScoreSeries) -> String {
    series_text(s.sample_period(), s.origin(), s.values().iter().map(f64::to_string))
}

pub fn write_labels(l: &LabelSeries) -> String {
    series_text(l.sample_period(), l.origin(), l.labels().iter().map(u8::to_string))
}

pub fn parse_histograms(text: &str) -> Result<HistogramSeries> {
    let s = sections(text, &["B", "period", "origin"])?;
    let bins: usize = s.get("B")?;
    if bins == 0 {
        return Err(parse_err(s.header_line, "B must be at least 1"));
    }
    let mut frames = Vec::with_capacity(s.data.len());
    for &(n, l) in &s.data {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != bins {
            return Err(parse_err(n, format!("expected {bins} bins, found {}", fields.len())));
        }
        let f = reals(&fields, n)?;
        if f.iter().any(|v| *v < 0.0) {
            return Err(parse_err(n, "histogram bins must be non-negative"));
        }
        frames.push(f);
    }
    if frames.is_empty() {
        return Err(invalid_input("histogram file has no frames"));
    }
    HistogramSeries::new(frames, bins, s.get_real("period")?, s.get_real("origin")?)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn write_histograms(h: &HistogramSeries) -> String {
    let mut out = format!("# B={} period={} origin={}\n", h.bins(), h.sample_period(), h.origin());
    for f in h.frames() {
        out.push_str(&join(f));
        out.push('\n');
    }
    out
}

/// Descriptors of one frame, positions in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorFrame {
    pub frame: usize,
    pub width: f64,
    pub height: f64,
    pub points: Vec<[f64; 2]>,
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
}

impl DescriptorFrame {
    /// Descriptors with positions scaled into the unit square.
    pub fn descriptors(&self) -> Result<DescriptorSet> {
        let pos = self
            .points
            .iter()
            .map(|[x, y]| [x / self.width, y / self.height])
            .collect();
        DescriptorSet::with_positions(self.dim, self.vectors.clone(), pos)
    }
}

/// One or more frames, each introduced by
/// `# frame=<i> width=<px> height=<px> count=<F> dim=<d>`.
pub fn parse_descriptors(text: &str) -> Result<Vec<DescriptorFrame>> {
    let mut frames: Vec<(usize, DescriptorFrame, usize)> = Vec::new();
    let close = |frames: &[(usize, DescriptorFrame, usize)]| -> Result<()> {
        if let Some((hl, f, count)) = frames.last() {
            if f.vectors.len() != *count {
                return Err(parse_err(*hl, format!("frame {} declares {count} descriptors, found {}", f.frame, f.vectors.len())));
            }
        }
        Ok(())
    };
    for (n, l) in lines(text) {
        if let Some(rest) = l.strip_prefix('#') {
            let h = header_fields(rest);
            if !h.contains_key("frame") {
                continue;
            }
            close(&frames)?;
            for key in ["frame", "width", "height", "count", "dim"] {
                if !h.contains_key(key) {
                    return Err(parse_err(n, format!("frame header lacks {key}")));
                }
            }
            let width = real(h["width"], "width", n)?;
            let height = real(h["height"], "height", n)?;
            if width <= 0.0 || height <= 0.0 {
                return Err(parse_err(n, "frame width and height must be positive"));
            }
            let dim: usize = number(h["dim"], "dim", n)?;
            if dim == 0 {
                return Err(parse_err(n, "dim must be at least 1"));
            }
            let frame = DescriptorFrame {
                frame: number(h["frame"], "frame", n)?,
                width,
                height,
                points: Vec::new(),
                vectors: Vec::new(),
                dim,
            };
            frames.push((n, frame, number(h["count"], "count", n)?));
            continue;
        }
        let Some((_, f, _)) = frames.last_mut() else {
            return Err(parse_err(n, "descriptor line before any frame header"));
        };
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != f.dim + 2 {
            return Err(parse_err(n, format!("expected x,y plus {} values, found {} fields", f.dim, fields.len())));
        }
        let v = reals(&fields, n)?;
        if !(0.0..=f.width).contains(&v[0]) || !(0.0..=f.height).contains(&v[1]) {
            return Err(parse_err(n, "position outside the frame"));
        }
        f.points.push([v[0], v[1]]);
        f.vectors.push(v[2..].to_vec());
    }
    close(&frames)?;
    Ok(frames.into_iter().map(|(_, f, _)| f).collect())
}

pub fn write_descriptors(frames: &[DescriptorFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        let _ = writeln!(
            out,
            "# frame={} width={} height={} count={} dim={}",
            f.frame,
            f.width,
            f.height,
            f.vectors.len(),
            f.dim
        );
        for (p, v) in f.points.iter().zip(&f.vectors) {
            let _ = writeln!(out, "{},{},{}", p[0], p[1], join(v));
        }
    }
    out
}

pub fn parse_codebook(text: &str) -> Result<Codebook> {
    let s = sections(text, &["K", "dim"])?;
    let k: usize = s.get("K")?;
    let dim: usize = s.get("dim")?;
    if s.data.len() != 2 * k {
        return Err(parse_err(s.header_line, format!("K={k} needs {} centroid lines, found {}", 2 * k, s.data.len())));
    }
    let mut centroids = Vec::with_capacity(2 * k);
    for &(n, l) in &s.data {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != dim {
            return Err(parse_err(n, format!("expected {dim} values, found {}", fields.len())));
        }
        centroids.push(reals(&fields, n)?);
    }
    Codebook::new(k, centroids)
}

pub fn write_codebook(cb: &Codebook) -> String {
    let mut out = format!("# K={} dim={}\n", cb.per_state(), cb.dim());
    for c in cb.centroids() {
        out.push_str(&join(c));
        out.push('\n');
    }
    out
}

pub fn parse_assignment(text: &str) -> Result<BinAssignment> {
    let s = sections(text, &["B"])?;
    let bins: usize = s.get("B")?;
    let mut map: Vec<Option<usize>> = vec![None; s.data.len()];
    for &(n, l) in &s.data {
        let fields: Vec<&str> = l.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_err(n, "expected centroid_index,bin_index"));
        }
        let c: usize = number(fields[0], "centroid index", n)?;
        let b: usize = number(fields[1], "bin index", n)?;
        if c >= map.len() {
            return Err(parse_err(n, format!("centroid index {c} out of range for {} lines", map.len())));
        }
        if b >= bins {
            return Err(parse_err(n, format!("bin index {b} out of range for B={bins}")));
        }
        if map[c].replace(b).is_some() {
            return Err(parse_err(n, format!("centroid {c} assigned twice")));
        }
    }
    BinAssignment::new(map.into_iter().map(|b| b.expect("every index seen once")).collect(), bins)
}

pub fn write_assignment(a: &BinAssignment) -> String {
    let mut out = format!("# B={}\n", a.bins());
    for (c, b) in a.map().iter().enumerate() {
        let _ = writeln!(out, "{c},{b}");
    }
    out
}

fn check_id(id: &str, line: usize) -> Result<()> {
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(parse_err(line, format!("bad video id {id:?}")));
    }
    Ok(())
}

/// Ground truth, `video_id,time_seconds` per line, grouped by video.
pub fn parse_truth(text: &str) -> Result<BTreeMap<String, ChangePointSet>> {
    let mut by_video: BTreeMap<String, Vec<ChangePoint>> = BTreeMap::new();
    for (n, l) in lines(text) {
        if l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(n, "expected video_id,time_seconds"));
        }
        check_id(fields[0], n)?;
        let t = real(fields[1], "time", n)?;
        by_video.entry(fields[0].to_string()).or_default().push(ChangePoint::at(t));
    }
    Ok(by_video
        .into_iter()
        .map(|(k, v)| (k, ChangePointSet::new(crate::synth::TRUTH_ID, v)))
        .collect())
}

pub fn write_truth<'a>(sets: impl IntoIterator<Item = (&'a str, &'a ChangePointSet)>) -> String {
    let mut out = String::new();
    for (id, set) in sets {
        for t in set.times() {
            let _ = writeln!(out, "{id},{t}");
        }
    }
    out
}

/// Predictions keyed by detector id, then video id.
pub type Predictions = BTreeMap<String, BTreeMap<String, ChangePointSet>>;

pub fn parse_predictions(text: &str) -> Result<Predictions> {
    let mut raw: BTreeMap<String, BTreeMap<String, Vec<ChangePoint>>> = BTreeMap::new();
    for (n, l) in lines(text) {
        if l.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = l.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(n, "expected video_id,time_seconds,detector"));
        }
        check_id(fields[0], n)?;
        if fields[2].is_empty() {
            return Err(parse_err(n, "empty detector id"));
        }
        let t = real(fields[1], "time", n)?;
        raw.entry(fields[2].to_string())
            .or_default()
            .entry(fields[0].to_string())
            .or_default()
            .push(ChangePoint::at(t));
    }
    Ok(raw
        .into_iter()
        .map(|(det, videos)| {
            let sets = videos
                .into_iter()
                .map(|(v, pts)| (v, ChangePointSet::new(det.clone(), pts)))
                .collect();
            (det, sets)
        })
        .collect())
}

pub fn write_predictions<'a>(sets: impl IntoIterator<Item = (&'a str, &'a ChangePointSet)>) -> String {
    let mut out = String::new();
    for (id, set) in sets {
        for t in set.times() {
            let _ = writeln!(out, "{id},{t},{}", set.detector());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scores_round_trip() {
        let s = ScoreSeries::new(vec![0.1, -2.5, 1e-300, 3.0], 0.5, 12.25).unwrap();
        let text = write_scores(&s);
        assert!(text.starts_with("# period=0.5 origin=12.25\n0,0.1\n"));
        assert_eq!(parse_scores(&text).unwrap(), s);
    }

    #[test]
    fn labels_round_trip_and_reject_other_values() {
        let l = LabelSeries::new(vec![0, 1, 1, 0], 1.0, 0.0).unwrap();
        assert_eq!(parse_labels(&write_labels(&l)).unwrap(), l);
        let err = parse_labels("# period=1 origin=0\n0,0\n1,0.5\n").unwrap_err();
        assert_eq!(err, parse_err(3, "label must be 0 or 1, got 0.5"));
    }

    #[test]
    fn comments_before_header_are_ignored() {
        let s = parse_scores("# generator=x seed=1\n\n# period=2 origin=0\n0,1\n# note\n1,2\n").unwrap();
        assert_eq!(s.values(), &[1.0, 2.0]);
        assert_eq!(s.sample_period(), 2.0);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let cases = [
            ("0,1\n", 1),
            ("# period=1 origin=0\n0,1\n2,3\n", 3),
            ("# period=1 origin=0\n0,1\n1,abc\n", 3),
            ("# period=1 origin=0\n0,1,2\n", 2),
            ("# period=x origin=0\n0,1\n", 1),
            ("# period=1 origin=0\n0,NaN\n", 2),
        ];
        for (text, line) in cases {
            match parse_scores(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(matches!(parse_scores("# period=1 origin=0\n"), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn histograms_round_trip() {
        let h = HistogramSeries::new(vec![vec![1.0, 0.0, 2.5], vec![0.0, 4.0, 1.0]], 3, 1.0, 0.0).unwrap();
        let text = write_histograms(&h);
        assert!(text.starts_with("# B=3 period=1 origin=0\n1,0,2.5\n"));
        assert_eq!(parse_histograms(&text).unwrap(), h);
        assert!(matches!(
            parse_histograms("# B=2 period=1 origin=0\n1,2\n3\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_histograms("# B=2 period=1 origin=0\n1,-2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn descriptors_round_trip_and_normalize() {
        let text = "# frame=0 width=200 height=100 count=2 dim=3\n\
                    0,0,1,2,3\n\
                    200,50,4,5,6\n\
                    # frame=1 width=200 height=100 count=0 dim=3\n";
        let frames = parse_descriptors(text).unwrap();
        assert_eq!(frames.len(), 2);
        let d = frames[0].descriptors().unwrap();
        assert_eq!(d.positions().unwrap(), &[[0.0, 0.0], [1.0, 0.5]]);
        assert_eq!(d.vectors()[1], vec![4.0, 5.0, 6.0]);
        assert!(frames[1].descriptors().unwrap().is_empty());
        assert_eq!(parse_descriptors(&write_descriptors(&frames)).unwrap(), frames);
        assert!(matches!(
            parse_descriptors("# frame=0 width=10 height=10 count=2 dim=1\n1,1,5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_descriptors("# frame=0 width=10 height=10 count=1 dim=1\n11,1,5\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn codebook_and_assignment_round_trip() {
        let cb = Codebook::new(1, vec![vec![0.0, 1.0], vec![2.0, 3.5]]).unwrap();
        let text = write_codebook(&cb);
        assert_eq!(text, "# K=1 dim=2\n0,1\n2,3.5\n");
        assert_eq!(parse_codebook(&text).unwrap(), cb);
        assert!(parse_codebook("# K=2 dim=2\n0,1\n2,3\n").is_err());

        let a = BinAssignment::new(vec![0, 0, 1, 2], 3).unwrap();
        let text = write_assignment(&a);
        assert_eq!(parse_assignment(&text).unwrap(), a);
        assert_eq!(parse_assignment("# B=1\n1,0\n0,0\n").unwrap().map(), &[0, 0]);
        assert!(matches!(parse_assignment("# B=1\n0,0\n0,0\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_assignment("# B=1\n0,1\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn truth_and_predictions() {
        let truth = parse_truth("v2,30\nv1,10\nv1,5\n").unwrap();
        assert_eq!(truth.keys().collect::<Vec<_>>(), vec!["v1", "v2"]);
        assert_eq!(truth["v1"].times(), vec![5.0, 10.0]);
        let text = write_truth(truth.iter().map(|(k, v)| (k.as_str(), v)));
        assert_eq!(text, "v1,5\nv1,10\nv2,30\n");

        let p = parse_predictions("a,1.5,mse\nb,2,hmm\na,0.5,mse\n").unwrap();
        assert_eq!(p["mse"]["a"].times(), vec![0.5, 1.5]);
        assert_eq!(p["hmm"]["b"].detector(), "hmm");
        let text = write_predictions(p["mse"].iter().map(|(k, v)| (k.as_str(), v)));
        assert_eq!(text, "a,0.5,mse\na,1.5,mse\n");
        assert!(matches!(parse_predictions("a,1\n"), Err(Error::Parse { line: 1, .. })));
    }
}
