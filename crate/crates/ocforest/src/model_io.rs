//! Versioned binary model files.
//!
//! Layout (all integers little-endian, all floats IEEE-754 binary64):
//! a fixed header (magic `OCF1`, format version, model kind, criterion,
//! dimensions, hyperparameters), then each tree as its subsample size,
//! feature subset, node count, and the nodes in pre-order. Each node record
//! is `kind, depth, n_inliers, cell bounds` and, for internal nodes, the
//! split feature and threshold. See docs/FORMATS.md for the exact byte
//! offsets. Round trips are lossless: floats are stored bit-for-bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::cell::Cell;
use crate::error::{Error, Result};
use crate::params::{Criterion, HyperParams};
use crate::tree::{Forest, ModelKind, NodeKind, OneClassTree, TreeNode};

pub const MAGIC: &[u8; 4] = b"OCF1";
pub const FORMAT_VERSION: u16 = 1;

fn kind_byte(kind: ModelKind) -> u8 {
    match kind {
        ModelKind::OneClassForest => 0,
        ModelKind::IsolationForest => 1,
    }
}

fn kind_from_byte(b: u8) -> Result<ModelKind> {
    match b {
        0 => Ok(ModelKind::OneClassForest),
        1 => Ok(ModelKind::IsolationForest),
        other => Err(Error::ModelFormat(format!(
            "unknown model kind byte {other}"
        ))),
    }
}

fn criterion_byte(c: Criterion) -> u8 {
    match c {
        Criterion::OcGini => 0,
        Criterion::OcShannon => 1,
        Criterion::NaiveOcGini => 2,
    }
}

fn criterion_from_byte(b: u8) -> Result<Criterion> {
    match b {
        0 => Ok(Criterion::OcGini),
        1 => Ok(Criterion::OcShannon),
        2 => Ok(Criterion::NaiveOcGini),
        other => Err(Error::ModelFormat(format!(
            "unknown criterion byte {other}"
        ))),
    }
}

struct Writer<W: Write> {
    out: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.out.write_all(&[v])?)
    }
    fn u16(&mut self, v: u16) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn usize32(&mut self, v: usize) -> Result<()> {
        let v = u32::try_from(v)
            .map_err(|_| Error::ModelFormat(format!("value {v} exceeds the u32 field width")))?;
        self.u32(v)
    }
}

struct Reader<R: Read> {
    inp: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inp.read_exact(&mut buf)?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

/// Serializes a forest to `out`.
pub fn write_model<W: Write>(forest: &Forest, out: W) -> Result<()> {
    let mut w = Writer { out };
    let hp = &forest.hyperparams;
    w.out.write_all(MAGIC)?;
    w.u16(FORMAT_VERSION)?;
    w.u8(kind_byte(forest.kind))?;
    w.u8(criterion_byte(hp.criterion))?;
    w.usize32(forest.train_dims)?;
    w.f64(hp.max_samples_fraction)?;
    w.usize32(hp.max_samples_floor)?;
    w.f64(hp.max_features_tree_fraction)?;
    w.usize32(hp.max_features_tree_floor)?;
    w.usize32(hp.max_features_node)?;
    w.f64(hp.gamma)?;
    w.f64(hp.naive_alpha_n)?;
    w.usize32(hp.max_depth.unwrap_or(0))?; // 0 = computed default
    w.usize32(hp.n_trees)?;
    w.u64(hp.seed)?;
    w.usize32(forest.trees.len())?;
    for tree in &forest.trees {
        write_tree(&mut w, tree)?;
    }
    Ok(())
}

fn write_tree<W: Write>(w: &mut Writer<W>, tree: &OneClassTree) -> Result<()> {
    w.usize32(tree.subsample_size)?;
    w.usize32(tree.feature_subset.len())?;
    for &f in &tree.feature_subset {
        w.usize32(f)?;
    }
    w.usize32(tree.root.count_nodes())?;
    write_node(w, &tree.root)
}

fn write_node<W: Write>(w: &mut Writer<W>, node: &TreeNode) -> Result<()> {
    let internal = !node.is_leaf();
    w.u8(internal as u8)?;
    w.usize32(node.depth)?;
    w.usize32(node.n_inliers)?;
    for &v in node.cell.lower() {
        w.f64(v)?;
    }
    for &v in node.cell.upper() {
        w.f64(v)?;
    }
    if let NodeKind::Internal {
        split_feature,
        split_threshold,
        left,
        right,
    } = &node.kind
    {
        w.usize32(*split_feature)?;
        w.f64(*split_threshold)?;
        write_node(w, left)?;
        write_node(w, right)?;
    }
    Ok(())
}

/// Reads a forest previously written by [`write_model`].
pub fn read_model<R: Read>(inp: R) -> Result<Forest> {
    let mut r = Reader { inp };
    let magic = r.bytes::<4>()?;
    if &magic != MAGIC {
        return Err(Error::ModelFormat("bad magic: not a model file".into()));
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported format version {version} (expected {FORMAT_VERSION})"
        )));
    }
    let kind = kind_from_byte(r.u8()?)?;
    let criterion = criterion_from_byte(r.u8()?)?;
    let train_dims = r.u32()? as usize;
    let hyperparams = HyperParams {
        max_samples_fraction: r.f64()?,
        max_samples_floor: r.u32()? as usize,
        max_features_tree_fraction: r.f64()?,
        max_features_tree_floor: r.u32()? as usize,
        max_features_node: r.u32()? as usize,
        gamma: r.f64()?,
        naive_alpha_n: r.f64()?,
        max_depth: match r.u32()? as usize {
            0 => None,
            d => Some(d),
        },
        n_trees: r.u32()? as usize,
        criterion,
        seed: r.u64()?,
    };
    let n_trees = r.u32()? as usize;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        trees.push(read_tree(&mut r)?);
    }
    Ok(Forest {
        trees,
        hyperparams,
        train_dims,
        kind,
    })
}

fn read_tree<R: Read>(r: &mut Reader<R>) -> Result<OneClassTree> {
    let subsample_size = r.u32()? as usize;
    let n_features = r.u32()? as usize;
    let mut feature_subset = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        feature_subset.push(r.u32()? as usize);
    }
    let n_nodes = r.u32()? as usize;
    let mut read_count = 0usize;
    let root = read_node(r, n_features, n_nodes, &mut read_count)?;
    if read_count != n_nodes {
        return Err(Error::ModelFormat(format!(
            "tree declared {n_nodes} nodes but {read_count} were encoded"
        )));
    }
    Ok(OneClassTree {
        root,
        subsample_size,
        feature_subset,
    })
}

fn read_node<R: Read>(
    r: &mut Reader<R>,
    dims: usize,
    n_nodes: usize,
    read_count: &mut usize,
) -> Result<TreeNode> {
    if *read_count >= n_nodes {
        return Err(Error::ModelFormat(
            "node records exceed the declared count".into(),
        ));
    }
    *read_count += 1;
    let internal = match r.u8()? {
        0 => false,
        1 => true,
        other => {
            return Err(Error::ModelFormat(format!(
                "unknown node kind byte {other}"
            )))
        }
    };
    let depth = r.u32()? as usize;
    let n_inliers = r.u32()? as usize;
    let mut lower = Vec::with_capacity(dims);
    for _ in 0..dims {
        lower.push(r.f64()?);
    }
    let mut upper = Vec::with_capacity(dims);
    for _ in 0..dims {
        upper.push(r.f64()?);
    }
    let cell = Cell::new(lower, upper).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let kind = if internal {
        let split_feature = r.u32()? as usize;
        if split_feature >= dims {
            return Err(Error::ModelFormat(format!(
                "split feature {split_feature} out of range for {dims} dimensions"
            )));
        }
        let split_threshold = r.f64()?;
        let left = read_node(r, dims, n_nodes, read_count)?;
        let right = read_node(r, dims, n_nodes, read_count)?;
        NodeKind::Internal {
            split_feature,
            split_threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    } else {
        NodeKind::Leaf
    };
    Ok(TreeNode {
        cell,
        depth,
        n_inliers,
        kind,
    })
}

/// Writes a model file at `path`.
pub fn save_model(forest: &Forest, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    write_model(forest, &mut out)?;
    out.flush()?;
    Ok(())
}

/// Loads a model file from `path`.
pub fn load_model(path: &Path) -> Result<Forest> {
    let file = File::open(path)?;
    read_model(BufReader::new(file))
}
