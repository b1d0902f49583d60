#include "btcsync/messages.hpp"

#include <sstream>

namespace btcsync {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string items_text(const std::vector<InvItem>& items) {
  std::string out = "n=" + std::to_string(items.size());
  for (const auto& i : items) {
    out += (i.type == InvType::kTx ? " tx:" : " block:");
    out += i.hash.short_hex();
  }
  return out;
}

}  // namespace

std::string_view message_kind(const WireMessage& msg) {
  return std::visit(Overloaded{
                        [](const InvMsg&) { return std::string_view("inv"); },
                        [](const GetDataMsg&) { return std::string_view("getdata"); },
                        [](const HeadersMsg&) { return std::string_view("headers"); },
                        [](const GetHeadersMsg&) { return std::string_view("getheaders"); },
                        [](const BlockMsg&) { return std::string_view("block"); },
                        [](const TxMsg&) { return std::string_view("tx"); },
                        [](const AddrMsg&) { return std::string_view("addr"); },
                    },
                    msg);
}

std::string trace_line(std::string_view direction, PeerId peer, const WireMessage& msg) {
  std::ostringstream out;
  out << direction << ' ' << peer << ' ' << message_kind(msg) << ' ';
  std::visit(Overloaded{
                 [&](const InvMsg& m) { out << items_text(m.items); },
                 [&](const GetDataMsg& m) { out << items_text(m.items); },
                 [&](const HeadersMsg& m) {
                   out << "n=" << m.headers.size();
                   if (!m.headers.empty()) out << " first=" << m.headers.front().hash().short_hex();
                 },
                 [&](const GetHeadersMsg& m) {
                   out << "locator=" << m.locator.size();
                   if (!m.locator.empty()) out << " tip=" << m.locator.front().short_hex();
                 },
                 [&](const BlockMsg& m) {
                   out << m.block.hash().short_hex() << " txs=" << m.block.transactions.size();
                 },
                 [&](const TxMsg& m) { out << m.tx.txid().short_hex(); },
                 [&](const AddrMsg& m) { out << "n=" << m.addresses.size(); },
             },
             msg);
  return out.str();
}

}  // namespace btcsync
