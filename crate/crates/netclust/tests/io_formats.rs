use std::fs;

use netclust::io::{self, Error};
use netclust_core::distance::euclidean_distances;
use netclust_core::ge::PseudoinverseCache;
use netclust_core::sbm::generate_dataset;
use netclust_core::tsne::{tsne_embed, TsneConfig};
use netclust_core::{AttributeMatrix, Labeling, Metric, SbmConfig};

fn small_dataset() -> netclust_core::LabeledDataset {
    let cfg = SbmConfig { k: 2, community_size: 8, avg_degree: 5.0, d_out: 1.0, n_obs: 12, seed: 3, ..Default::default() };
    generate_dataset(&cfg).unwrap()
}

#[test]
fn attributes_round_trip_and_reorder_to_graph_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("attrs.csv");
    fs::write(&path, "observation_id,b,a,c\no1,2,1,3\no2,-0.5,0.25,1e-3\n").unwrap();
    let order: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let m = io::read_attributes(&path, Some(&order)).unwrap();
    assert_eq!(m.row(0), &[1.0, 2.0, 3.0]);
    assert_eq!(m.row(1), &[0.25, -0.5, 1e-3]);

    let data = small_dataset();
    io::write_attributes(&path, &data.attributes, data.graph.node_ids()).unwrap();
    let back = io::read_attributes(&path, Some(data.graph.node_ids())).unwrap();
    assert_eq!(back, data.attributes);
}

#[test]
fn attribute_columns_must_cover_graph_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("attrs.csv");
    fs::write(&path, "observation_id,a,b\no1,1,2\n").unwrap();
    let order: Vec<String> = vec!["a".into(), "z".into()];
    let err = io::read_attributes(&path, Some(&order)).unwrap_err();
    assert!(err.to_string().contains("`z`"), "{err}");
    fs::write(&path, "observation_id,a,b\no1,1,x\n").unwrap();
    assert!(matches!(io::read_attributes(&path, None), Err(Error::Format { .. })));
}

#[test]
fn distances_round_trip_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let data = small_dataset();
    let d = euclidean_distances(&data.attributes).unwrap();
    io::write_distances(&path, data.attributes.ids(), &d).unwrap();
    let (ids, back) = io::read_distances(&path, Metric::Euclidean).unwrap();
    assert_eq!(ids, data.attributes.ids());
    assert_eq!(back, d);
}

#[test]
fn embedding_and_labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset();
    let d = euclidean_distances(&data.attributes).unwrap();
    let e = tsne_embed(&d, &TsneConfig { iterations: 200, ..Default::default() }).unwrap();
    let path = dir.path().join("emb.csv");
    io::write_embedding(&path, data.attributes.ids(), &e).unwrap();
    let (ids, coords) = io::read_embedding(&path).unwrap();
    assert_eq!(ids, data.attributes.ids());
    assert_eq!(coords, e.coords);

    let labels = Labeling::new(vec![0, -1, 1, 1, -1, 0, 0, 1, 1, 0, -1, 2]);
    let path = dir.path().join("labels.csv");
    io::write_labels(&path, data.attributes.ids(), &labels).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("observation_id,label,eval_label"));
    assert_eq!(lines.next().unwrap().split(',').skip(1).collect::<Vec<_>>(), ["0", "0"]);
    assert_eq!(lines.next().unwrap().split(',').skip(1).collect::<Vec<_>>(), ["-1", "3"]);
    let (_, back) = io::read_labels(&path).unwrap();
    assert_eq!(back, labels);
}

fn labeled_edges(g: &netclust_core::Graph) -> Vec<(String, String, u64)> {
    let ids = g.node_ids();
    let mut v: Vec<_> = g
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (ids[e.u].clone(), ids[e.v].clone());
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            (a, b, e.weight.to_bits())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn graphs_round_trip_and_layers_flatten() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset();
    let path = dir.path().join("g.edges");
    io::write_graph(&path, &data.graph).unwrap();
    let back = io::read_flat_graph(&path, false, 1.0).unwrap();
    assert_eq!(labeled_edges(&back), labeled_edges(&data.graph));
    // once in file order, a second round trip is exact
    io::write_graph(&path, &back).unwrap();
    assert_eq!(io::read_flat_graph(&path, false, 1.0).unwrap(), back);

    fs::write(&path, "# two layers\na b 2 l1\nb c l1\na c 1 l2\n").unwrap();
    let g = io::read_flat_graph(&path, true, 0.5).unwrap();
    assert_eq!(g.node_count(), 5);
    // 3 intra-layer edges plus couplings for a and c
    assert_eq!(g.edge_count(), 5);
    assert!(g.node_ids().iter().any(|id| id == "a@l2"));
    assert!(io::read_flat_graph(&path, false, 1.0).is_err());
}

#[test]
fn pseudoinverse_cache_persists_by_fingerprint() {
    let dir = tempfile::tempdir().unwrap();
    let data = small_dataset();
    let fp = data.graph.fingerprint();
    assert!(io::load_pinv(dir.path(), &fp).unwrap().is_none());
    let mut cache = PseudoinverseCache::from_graph(&data.graph).unwrap();
    cache.set_fingerprint(fp.clone());
    let path = io::save_pinv(dir.path(), &cache).unwrap();
    assert_eq!(io::load_pinv(dir.path(), &fp).unwrap().unwrap().values(), cache.values());
    let mut bytes = fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    fs::write(&path, bytes).unwrap();
    assert!(io::load_pinv(dir.path(), &fp).is_err());
}

#[test]
fn float_text_is_shortest_round_trip() {
    for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -0.0] {
        assert_eq!(io::float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
    let m = AttributeMatrix::from_rows(&[vec![0.1, 0.2]]).unwrap();
    assert_eq!(m.row(0), &[0.1, 0.2]);
}
