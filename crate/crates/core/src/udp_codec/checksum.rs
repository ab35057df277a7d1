use std::net::Ipv4Addr;

use super::IP_PROTO_UDP;

/// End-around-carry sum of big-endian 16-bit words, odd tail zero-padded.
pub fn ones_complement_sum(initial: u32, bytes: &[u8]) -> u16 {
    let mut sum = initial;
    let mut chunks = bytes.chunks_exact(2);
    for c in &mut chunks {
        sum += u16::from_be_bytes([c[0], c[1]]) as u32;
    }
    if let [last] = chunks.remainder() {
        sum += (*last as u32) << 8;
    }
    while sum > 0xffff {
        sum = (sum & 0xffff) + (sum >> 16);
    }
    sum as u16
}

pub fn internet_checksum(bytes: &[u8]) -> u16 {
    !ones_complement_sum(0, bytes)
}

/// Checksum over a 20-byte header whose checksum field is ignored.
pub fn ipv4_header_checksum(header: &[u8]) -> u16 {
    let mut h = [0u8; 20];
    h.copy_from_slice(&header[..20]);
    h[10] = 0;
    h[11] = 0;
    internet_checksum(&h)
}

/// UDP checksum over the IPv4 pseudo-header and the UDP segment (header with
/// zeroed checksum plus payload). A computed 0 is transmitted as `0xFFFF`.
pub fn udp_checksum(src: Ipv4Addr, dst: Ipv4Addr, segment: &[u8]) -> u16 {
    let mut pseudo = [0u8; 12];
    pseudo[0..4].copy_from_slice(&src.octets());
    pseudo[4..8].copy_from_slice(&dst.octets());
    pseudo[9] = IP_PROTO_UDP;
    pseudo[10..12].copy_from_slice(&(segment.len() as u16).to_be_bytes());
    let head = ones_complement_sum(0, &pseudo);
    let mut seg = segment.to_vec();
    seg[6] = 0;
    seg[7] = 0;
    match !ones_complement_sum(head as u32, &seg) {
        0 => 0xffff,
        c => c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_header_checksum() {
        // Widely published example header, checksum 0xb861.
        let h = [
            0x45, 0x00, 0x00, 0x73, 0x00, 0x00, 0x40, 0x00, 0x40, 0x11, 0x00, 0x00, 0xc0, 0xa8,
            0x00, 0x01, 0xc0, 0xa8, 0x00, 0xc7,
        ];
        assert_eq!(ipv4_header_checksum(&h), 0xb861);
        let mut with = h;
        with[10..12].copy_from_slice(&0xb861u16.to_be_bytes());
        assert_eq!(ones_complement_sum(0, &with), 0xffff);
    }

    #[test]
    fn odd_length_pads_low_byte() {
        assert_eq!(ones_complement_sum(0, &[0x12]), 0x1200);
        assert_eq!(ones_complement_sum(0, &[0xff, 0xff, 0x00, 0x02]), 0x0002);
    }
}
