use graybox::error::IoError;
use graybox::image::{load_reference_input, parse_csv, parse_idx, save_image_csv};
use graybox::weights::{decode, encode, from_json, load_net, save_net, to_json};
use graybox_core::{Activation, NeuralNet};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample_net() -> NeuralNet {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    NeuralNet::random(
        &[5, 7, 4, 3],
        Activation::Tanh,
        Activation::Softmax,
        &mut rng,
    )
    .unwrap()
}

fn bits(net: &NeuralNet) -> Vec<u64> {
    net.layers()
        .iter()
        .flat_map(|l| {
            l.weight()
                .as_slice()
                .iter()
                .chain(l.bias())
                .map(|v| v.to_bits())
        })
        .collect()
}

fn header(layers: u32) -> Vec<u8> {
    let mut b = b"GBNN".to_vec();
    b.extend_from_slice(&1u32.to_le_bytes());
    b.extend_from_slice(&layers.to_le_bytes());
    b
}

fn layer(rows: u32, cols: u32, act: u8, values: usize) -> Vec<u8> {
    let mut b = rows.to_le_bytes().to_vec();
    b.extend_from_slice(&cols.to_le_bytes());
    b.push(act);
    for k in 0..values {
        b.extend_from_slice(&(k as f64 * 0.1).to_le_bytes());
    }
    b
}

#[test]
fn binary_round_trip_is_bit_exact() {
    let net = sample_net();
    let back = decode(&encode(&net)).unwrap();
    assert_eq!(bits(&back), bits(&net));
    assert_eq!(back, net);
    assert_eq!(encode(&back), encode(&net));
}

#[test]
fn json_round_trip_is_bit_exact() {
    let net = sample_net();
    let back = from_json(&to_json(&net)).unwrap();
    assert_eq!(bits(&back), bits(&net));
}

#[test]
fn files_dispatch_on_extension() {
    let dir = tempfile::tempdir().unwrap();
    let net = sample_net();
    for name in ["net.gbnn", "net.json"] {
        let path = dir.path().join(name);
        save_net(&net, &path).unwrap();
        assert_eq!(bits(&load_net(&path).unwrap()), bits(&net));
    }
    let text = std::fs::read_to_string(dir.path().join("net.json")).unwrap();
    assert!(text.contains("\"activation\""));
}

#[test]
fn malformed_headers() {
    assert!(matches!(decode(&[]), Err(IoError::MalformedHeader(_))));
    assert!(matches!(decode(b"GBN"), Err(IoError::MalformedHeader(_))));
    let mut bad_magic = header(1);
    bad_magic[0] = b'X';
    assert!(matches!(
        decode(&bad_magic),
        Err(IoError::MalformedHeader(_))
    ));
    let mut bad_version = header(1);
    bad_version[4] = 7;
    assert!(matches!(
        decode(&bad_version),
        Err(IoError::MalformedHeader(_))
    ));
    assert!(matches!(
        decode(&header(0)),
        Err(IoError::MalformedHeader(_))
    ));
    let mut bad_act = header(1);
    bad_act.extend(layer(1, 1, 99, 2));
    assert!(matches!(decode(&bad_act), Err(IoError::MalformedHeader(_))));
}

#[test]
fn inconsistent_dimensions() {
    // second layer expects 3 inputs but the first produces 2
    let mut b = header(2);
    b.extend(layer(2, 4, 1, 2 * 4 + 2));
    b.extend(layer(1, 3, 0, 3 + 1));
    assert!(matches!(
        decode(&b),
        Err(IoError::DimensionInconsistency(_))
    ));

    let mut zero = header(1);
    zero.extend(layer(0, 3, 0, 0));
    assert!(matches!(
        decode(&zero),
        Err(IoError::DimensionInconsistency(_))
    ));

    let json = r#"{"version":1,"layers":[{"rows":2,"cols":1,"activation":"tanh","weights":[1.0,2.0],"bias":[0.0]}]}"#;
    assert!(matches!(
        from_json(json),
        Err(IoError::DimensionInconsistency(_))
    ));
}

#[test]
fn truncated_and_trailing_payloads() {
    let full = encode(&sample_net());
    for cut in [13, 40, full.len() - 1] {
        assert!(
            matches!(decode(&full[..cut]), Err(IoError::TruncatedPayload { .. })),
            "cut at {cut}"
        );
    }
    let mut long = full.clone();
    long.extend_from_slice(&[0, 0, 0]);
    assert!(matches!(decode(&long), Err(IoError::TrailingData(3))));
}

#[test]
fn csv_images() {
    assert_eq!(parse_csv("0,0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
    assert_eq!(
        parse_csv("0, 0.25\n0.75 ,1\n").unwrap(),
        vec![0.0, 0.25, 0.75, 1.0]
    );
    assert!(matches!(
        parse_csv("0,1.5"),
        Err(IoError::PixelOutOfRange { index: 1, .. })
    ));
    assert!(parse_csv("0,abc").is_err());
    assert!(parse_csv("").is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("img.csv");
    let x = vec![0.1, 0.2, 1.0 / 3.0];
    save_image_csv(&x, &path).unwrap();
    assert_eq!(load_reference_input(&path).unwrap(), x);
}

fn idx_fixture(count: u32) -> Vec<u8> {
    let mut b = vec![0, 0, 0x08, 3];
    for d in [count, 28, 28] {
        b.extend_from_slice(&d.to_be_bytes());
    }
    for k in 0..count as usize * 784 {
        b.push((k % 256) as u8);
    }
    b
}

#[test]
fn idx_images() {
    let x = parse_idx(&idx_fixture(2)).unwrap();
    assert_eq!(x.len(), 784);
    assert_eq!(x[0], 0.0);
    assert_eq!(x[255], 1.0);
    assert_eq!(x[1], 1.0 / 255.0);

    let mut short = idx_fixture(1);
    short.pop();
    assert!(parse_idx(&short).is_err());
    assert!(parse_idx(&[0, 0, 0x09, 1, 0, 0, 0, 1, 0]).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("digits.idx");
    std::fs::write(&path, idx_fixture(1)).unwrap();
    assert_eq!(load_reference_input(&path).unwrap().len(), 784);
}
