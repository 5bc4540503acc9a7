use std::fs;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tilda::augment::ImageTensor;
use tilda::io::{
    load_model, read_csv_features, read_features, read_images, read_labeled, save_model,
    write_csv_features, write_features, write_images, write_labels,
};
use tilda::{AnchorStore, Error, FeatureVector, ModelConfig};

fn random_vectors(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<FeatureVector> {
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| rng.random_range(-5.0f32..5.0))
                .collect::<Vec<_>>()
                .into()
        })
        .collect()
}

#[test]
fn feature_files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.tfv");
    write_features(&path, &[]).unwrap();
    assert!(read_features(&path).unwrap().is_empty());
    assert_eq!(fs::metadata(&path).unwrap().len(), 12);

    let vs = vec![
        FeatureVector::from(vec![1.0, 2.0, 3.0]),
        FeatureVector::from(vec![-0.5, 1e-7, 3e30]),
    ];
    write_features(&path, &vs).unwrap();
    assert_eq!(read_features(&path).unwrap(), vs);

    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 6]).unwrap();
    match read_features(&path) {
        Err(Error::Truncated { expected, actual }) => assert_eq!((expected, actual), (36, 30)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        read_features(dir.path().join("missing")),
        Err(Error::Io(_))
    ));
}

#[test]
fn labels_must_pair_with_features() {
    let dir = tempfile::tempdir().unwrap();
    let (f, l) = (dir.path().join("x.tfv"), dir.path().join("x.lbl"));
    write_features(
        &f,
        &[
            FeatureVector::from(vec![1.0]),
            FeatureVector::from(vec![2.0]),
        ],
    )
    .unwrap();
    write_labels(&l, &["a", "b"]).unwrap();
    let pairs = read_labeled(&f, &l).unwrap();
    assert_eq!(pairs[1].1, "b");
    write_labels(&l, &["a"]).unwrap();
    assert!(matches!(
        read_labeled(&f, &l),
        Err(Error::LabelCountMismatch {
            features: 2,
            labels: 1
        })
    ));
}

#[test]
fn csv_and_binary_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vs = random_vectors(&mut rng, 25, 6);
    let labels: Vec<String> = (0..25).map(|i| format!("k{}", i % 4)).collect();

    let (f, l, c) = (
        dir.path().join("d.tfv"),
        dir.path().join("d.lbl"),
        dir.path().join("d.csv"),
    );
    write_features(&f, &vs).unwrap();
    write_labels(&l, &labels).unwrap();
    let rows: Vec<(FeatureVector, String)> =
        vs.iter().cloned().zip(labels.iter().cloned()).collect();
    write_csv_features(&c, &rows).unwrap();

    assert_eq!(
        read_csv_features(&c, false).unwrap(),
        read_labeled(&f, &l).unwrap()
    );

    fs::write(&c, "a,b,label\n1,2,x\n3,4,y\n5,y\n").unwrap();
    match read_csv_features(&c, true) {
        Err(Error::RaggedRow { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    fs::write(&c, "1,2,x\n3,4,y\n5,y\n").unwrap();
    assert!(matches!(
        read_csv_features(&c, false),
        Err(Error::RaggedRow { line: 3, .. })
    ));
}

#[test]
fn model_round_trip_predicts_identically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.tilda");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut store = AnchorStore::new(ModelConfig::new(4, 3, 16, 77).unwrap()).unwrap();
    for (i, x) in random_vectors(&mut rng, 100, 16).iter().enumerate() {
        store
            .learn_one(x, ["ant", "bee", "cat", "ému"][i % 4])
            .unwrap();
    }
    save_model(&path, &store).unwrap();
    let mut loaded = load_model(&path).unwrap();
    assert_eq!(loaded, store);
    for x in random_vectors(&mut rng, 50, 16) {
        assert_eq!(
            loaded.predict_one(&x).unwrap(),
            store.predict_one(&x).unwrap()
        );
    }

    // RNG state survives: continued learning stays in lockstep
    let more = random_vectors(&mut rng, 30, 16);
    for x in &more {
        store.learn_one(x, "new").unwrap();
        loaded.learn_one(x, "new").unwrap();
    }
    assert_eq!(loaded, store);

    let mut bytes = fs::read(&path).unwrap();
    bytes[1] = b'X';
    fs::write(&path, &bytes).unwrap();
    assert!(matches!(load_model(&path), Err(Error::BadMagic { .. })));
}

#[test]
fn image_containers_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("imgs.timg");
    let imgs = vec![
        ImageTensor::new(2, 2, 3, (0..12).collect()).unwrap(),
        ImageTensor::zeros(2, 2, 3).unwrap(),
    ];
    write_images(&path, &imgs).unwrap();
    assert_eq!(read_images(&path).unwrap(), imgs);
}
