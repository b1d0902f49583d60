#pragma once

#include <array>
#include <string>

#include "btcsync/chain_params.hpp"
#include "btcsync/hash.hpp"

namespace btcsync {

using Hash160 = std::array<std::uint8_t, 20>;

/// Address under which an output is indexed.
///
/// P2PKH and P2SH map to base58check, P2WPKH to bech32. Any other script is
/// indexed as "script:" followed by the display hex of its double-SHA256.
std::string address_of_script(ByteSpan script_pubkey, NetworkKind network);

Bytes p2pkh_script(const Hash160& key_hash);
Bytes p2sh_script(const Hash160& script_hash);
Bytes p2wpkh_script(const Hash160& key_hash);

std::string base58check_encode(ByteSpan payload);
/// Segwit version-0 address for a 20- or 32-byte program.
std::string bech32_segwit_encode(std::string_view hrp, ByteSpan program);

}  // namespace btcsync
