use std::net::Ipv4Addr;

use fft3d_core::udp_codec::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> Vec<u8> {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    let text = text.trim();
    (0..text.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&text[i..i + 2], 16).unwrap())
        .collect()
}

fn node_a() -> (MacAddr, Ipv4Addr) {
    (MacAddr([2, 0, 0, 0, 0, 1]), Ipv4Addr::new(10, 0, 0, 1))
}

fn node_b() -> (MacAddr, Ipv4Addr) {
    (MacAddr([2, 0, 0, 0, 1, 2]), Ipv4Addr::new(10, 0, 1, 2))
}

fn fixed_config() -> HeaderConfig {
    HeaderConfig {
        src_mac: node_a().0,
        dst_mac: node_b().0,
        src_ip: node_a().1,
        dst_ip: node_b().1,
        src_port: 4000,
        dst_port: 4001,
        dscp: 0,
        identification: 0x1234,
        ttl: 64,
        dont_fragment: true,
    }
}

/// Independent RFC 1071 sum over the ten header half-words.
fn reference_ip_checksum(header: &[u8]) -> u16 {
    let mut sum: u32 = 0;
    for i in 0..10 {
        if i == 5 {
            continue;
        }
        sum += ((header[2 * i] as u32) << 8) | header[2 * i + 1] as u32;
    }
    while sum >> 16 != 0 {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    !(sum as u16)
}

#[test]
fn fixed_frame_matches_golden_bytes() {
    let (headers, bytes) = encode_bytes(&fixed_config(), b"fft3d-udp-fixture!").unwrap();
    assert_eq!(bytes, fixture("udp_fixed_18.hex"));
    assert_eq!(
        headers.ipv4.header_checksum,
        reference_ip_checksum(&bytes[14..34])
    );
    assert_eq!(headers.ipv4.header_checksum, 0x1389);
    assert_eq!(headers.udp.checksum, 0xedab);
}

#[test]
fn arp_frames_match_golden_bytes() {
    let a = ArpEndpoint::new(node_a().0, node_a().1);
    let Resolution::Miss(request) = a.resolve(node_b().1) else {
        panic!("fresh cache must miss");
    };
    assert_eq!(request, fixture("arp_request.hex"));

    let mut b = ArpEndpoint::new(node_b().0, node_b().1);
    let Decoded::Arp { packet, .. } = decode_bytes(&request).unwrap() else {
        panic!("request did not decode as ARP");
    };
    let reply = b.handle(&packet).unwrap();
    assert_eq!(reply, fixture("arp_reply.hex"));
}

#[test]
fn arp_ethertype_routes_to_arp() {
    assert!(matches!(
        decode_bytes(&fixture("arp_request.hex")).unwrap(),
        Decoded::Arp { .. }
    ));
    assert!(matches!(
        decode_bytes(&fixture("udp_fixed_18.hex")).unwrap(),
        Decoded::Udp(_)
    ));
}

fn random_config(rng: &mut ChaCha8Rng) -> HeaderConfig {
    let mut mac = || {
        let mut m = [0u8; 6];
        rng.fill(&mut m);
        MacAddr(m)
    };
    let (src_mac, dst_mac) = (mac(), mac());
    HeaderConfig {
        src_mac,
        dst_mac,
        src_ip: Ipv4Addr::from(rng.random::<u32>()),
        dst_ip: Ipv4Addr::from(rng.random::<u32>()),
        src_port: rng.random(),
        dst_port: rng.random(),
        dscp: rng.random_range(0..64),
        identification: rng.random(),
        ttl: rng.random(),
        dont_fragment: rng.random(),
    }
}

#[test]
fn random_round_trip_all_widths() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..1000 {
        let cfg = random_config(&mut rng);
        let len = rng.random_range(0..=MAX_PAYLOAD);
        let payload: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let dp = DatapathConfig::ALL[i % DatapathConfig::ALL.len()];
        let frame = encode_frame(&cfg, &payload, &dp).unwrap();
        let bytes = 42 + len;
        assert_eq!(frame.words.len(), bytes.div_ceil(dp.width_bytes()));
        assert_eq!(frame.words.len(), dp.transmit_cycles(bytes));
        let Decoded::Udp(u) = decode_frame(&frame).unwrap() else {
            panic!("case {i} did not decode as UDP");
        };
        assert_eq!(u.headers.config(), cfg, "case {i}");
        assert_eq!(u.payload, payload, "case {i}");
        assert_eq!(u.headers.udp.length as usize, len + 8);
        assert_eq!(u.headers.ipv4.total_length as usize, len + 28);
        assert_ne!(u.headers.udp.checksum, 0);
    }
}

#[test]
fn any_single_bit_flip_in_ip_header_is_a_checksum_error() {
    let (_, bytes) = encode_bytes(&fixed_config(), b"fft3d-udp-fixture!").unwrap();
    for bit in 0..160 {
        let mut b = bytes.clone();
        b[14 + bit / 8] ^= 0x80 >> (bit % 8);
        assert_eq!(
            decode_bytes(&b).unwrap_err(),
            CodecError::Ipv4Checksum,
            "bit {bit}"
        );
    }
}

#[test]
fn golden_frame_pcap() {
    let frame = fixture("udp_fixed_18.hex");
    let mut w = PcapWriter::new(Vec::new()).unwrap();
    w.write_frame(&frame).unwrap();
    let out = w.finish().unwrap();
    assert_eq!(out.len(), 24 + 16 + frame.len());
    assert_eq!(&out[40..], frame.as_slice());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    /// Independent RFC 1071 fold over arbitrary bytes.
    fn fold(bytes: &[u8]) -> u16 {
        let mut sum: u32 = bytes
            .chunks(2)
            .map(|c| ((c[0] as u32) << 8) | *c.get(1).unwrap_or(&0) as u32)
            .sum();
        while sum >> 16 != 0 {
            sum = (sum & 0xffff) + (sum >> 16);
        }
        sum as u16
    }

    proptest! {
        #[test]
        fn header_invariants(
            seed in any::<u64>(),
            payload in prop::collection::vec(any::<u8>(), 0..=MAX_PAYLOAD),
            width in 0usize..5,
        ) {
            let cfg = random_config(&mut ChaCha8Rng::seed_from_u64(seed));
            let dp = DatapathConfig::ALL[width];
            let frame = encode_frame(&cfg, &payload, &dp).unwrap();
            let bytes = frame.to_bytes().unwrap();
            prop_assert_eq!(bytes.len(), 42 + payload.len());
            prop_assert_eq!(frame.words.len(), bytes.len().div_ceil(dp.width_bytes()));
            prop_assert_eq!(fold(&bytes[14..34]), 0xffff);
            let total = u16::from_be_bytes([bytes[16], bytes[17]]) as usize;
            prop_assert_eq!(total, 28 + payload.len());
            let udp_len = u16::from_be_bytes([bytes[38], bytes[39]]) as usize;
            prop_assert_eq!(udp_len, 8 + payload.len());
            let mut pseudo = Vec::new();
            pseudo.extend_from_slice(&bytes[26..34]);
            pseudo.extend_from_slice(&[0, 17]);
            pseudo.extend_from_slice(&(udp_len as u16).to_be_bytes());
            pseudo.extend_from_slice(&bytes[34..]);
            prop_assert_eq!(fold(&pseudo), 0xffff);
            let Decoded::Udp(u) = decode_frame(&frame).unwrap() else {
                panic!("not UDP");
            };
            prop_assert_eq!(u.payload, payload);
        }

        #[test]
        fn oversize_rejected(extra in 1usize..2000) {
            let err = encode_bytes(&fixed_config(), &vec![0u8; MAX_PAYLOAD + extra]).unwrap_err();
            prop_assert!(matches!(err, CodecError::PayloadTooLarge(_)));
        }
    }
}
