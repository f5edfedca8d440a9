#include <algorithm>
#include <cctype>

#include "kanids/data.hpp"
#include "kanids/error.hpp"

namespace kanids {

namespace {

DatasetSchema nsl_kdd() {
    DatasetSchema s{DatasetName::NSL_KDD, 41, {}, {}, {}, {}, "label", {"normal"}, false};
    s.columns = {"duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
                 "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
                 "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells", "num_access_files",
                 "num_outbound_cmds", "is_host_login", "is_guest_login", "count", "srv_count", "serror_rate",
                 "srv_serror_rate", "rerror_rate", "srv_rerror_rate", "same_srv_rate", "diff_srv_rate",
                 "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count", "dst_host_same_srv_rate",
                 "dst_host_diff_srv_rate", "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate",
                 "dst_host_serror_rate", "dst_host_srv_serror_rate", "dst_host_rerror_rate",
                 "dst_host_srv_rerror_rate", "label"};
    s.optional_columns = {"difficulty"};
    s.categorical_columns = {"protocol_type", "service", "flag"};
    s.dropped_columns = {"difficulty"};
    return s;
}

DatasetSchema unsw_nb15() {
    DatasetSchema s{DatasetName::UNSW_NB15, 49, {}, {}, {}, {}, "Label", {"0"}, false};
    s.columns = {"srcip", "sport", "dstip", "dsport", "proto", "state", "dur", "sbytes", "dbytes", "sttl", "dttl",
                 "sloss", "dloss", "service", "Sload", "Dload", "Spkts", "Dpkts", "swin", "dwin", "stcpb", "dtcpb",
                 "smeansz", "dmeansz", "trans_depth", "res_bdy_len", "Sjit", "Djit", "Stime", "Ltime", "Sintpkt",
                 "Dintpkt", "tcprtt", "synack", "ackdat", "is_sm_ips_ports", "ct_state_ttl", "ct_flw_http_mthd",
                 "is_ftp_login", "ct_ftp_cmd", "ct_srv_src", "ct_srv_dst", "ct_dst_ltm", "ct_src_ltm",
                 "ct_src_dport_ltm", "ct_dst_sport_ltm", "ct_dst_src_ltm", "attack_cat", "Label"};
    s.categorical_columns = {"proto", "state", "service"};
    // Endpoint identifiers, timestamps and the attack category (a restatement of the label).
    s.dropped_columns = {"srcip", "sport", "dstip", "dsport", "Stime", "Ltime", "attack_cat"};
    return s;
}

DatasetSchema cicids2017() {
    DatasetSchema s{DatasetName::CICIDS2017, 80, {}, {}, {}, {}, "Label", {"BENIGN"}, true};
    s.columns = {"Destination Port", "Flow Duration", "Total Fwd Packets", "Total Backward Packets",
                 "Total Length of Fwd Packets", "Total Length of Bwd Packets", "Fwd Packet Length Max",
                 "Fwd Packet Length Min", "Fwd Packet Length Mean", "Fwd Packet Length Std", "Bwd Packet Length Max",
                 "Bwd Packet Length Min", "Bwd Packet Length Mean", "Bwd Packet Length Std", "Flow Bytes/s",
                 "Flow Packets/s", "Flow IAT Mean", "Flow IAT Std", "Flow IAT Max", "Flow IAT Min", "Fwd IAT Total",
                 "Fwd IAT Mean", "Fwd IAT Std", "Fwd IAT Max", "Fwd IAT Min", "Bwd IAT Total", "Bwd IAT Mean",
                 "Bwd IAT Std", "Bwd IAT Max", "Bwd IAT Min", "Fwd PSH Flags", "Bwd PSH Flags", "Fwd URG Flags",
                 "Bwd URG Flags", "Fwd Header Length", "Bwd Header Length", "Fwd Packets/s", "Bwd Packets/s",
                 "Min Packet Length", "Max Packet Length", "Packet Length Mean", "Packet Length Std",
                 "Packet Length Variance", "FIN Flag Count", "SYN Flag Count", "RST Flag Count", "PSH Flag Count",
                 "ACK Flag Count", "URG Flag Count", "CWE Flag Count", "ECE Flag Count", "Down/Up Ratio",
                 "Average Packet Size", "Avg Fwd Segment Size", "Avg Bwd Segment Size", "Fwd Header Length.1",
                 "Fwd Avg Bytes/Bulk", "Fwd Avg Packets/Bulk", "Fwd Avg Bulk Rate", "Bwd Avg Bytes/Bulk",
                 "Bwd Avg Packets/Bulk", "Bwd Avg Bulk Rate", "Subflow Fwd Packets", "Subflow Fwd Bytes",
                 "Subflow Bwd Packets", "Subflow Bwd Bytes", "Init_Win_bytes_forward", "Init_Win_bytes_backward",
                 "act_data_pkt_fwd", "min_seg_size_forward", "Active Mean", "Active Std", "Active Max", "Active Min",
                 "Idle Mean", "Idle Std", "Idle Max", "Idle Min", "Label"};
    // Present only in the flow-labelled distribution.
    s.optional_columns = {"Flow ID", "Source IP", "Source Port", "Destination IP", "Protocol", "Timestamp"};
    s.categorical_columns = {"Protocol"};
    s.dropped_columns = {"Flow ID", "Source IP", "Source Port", "Destination IP", "Timestamp"};
    return s;
}

DatasetSchema bot_iot() {
    DatasetSchema s{DatasetName::BOT_IOT, 32, {}, {}, {}, {}, "attack", {"0"}, true};
    s.columns = {"pkSeqID", "stime", "flgs", "flgs_number", "proto", "proto_number", "saddr", "sport",
                 "daddr", "dport", "pkts", "bytes", "state", "state_number", "ltime", "seq", "dur", "mean",
                 "stddev", "sum", "min", "max", "spkts", "dpkts", "sbytes", "dbytes", "rate", "srate", "drate",
                 "attack", "category", "subcategory"};
    s.categorical_columns = {"flgs", "proto", "state"};
    // Identifiers, timestamps, numeric duplicates of the categorical columns, and label restatements.
    s.dropped_columns = {"pkSeqID", "stime", "ltime", "saddr", "daddr", "sport", "dport", "seq",
                         "flgs_number", "proto_number", "state_number", "category", "subcategory"};
    return s;
}

DatasetSchema tri_ids() {
    DatasetSchema s{DatasetName::TRI_IDS, 120, {}, {}, {}, {}, "label", {}, false};
    return s;
}

bool contains(const std::vector<std::string>& list, const std::string& item) {
    return std::find(list.begin(), list.end(), item) != list.end();
}

}  // namespace

bool DatasetSchema::is_categorical(const std::string& column) const { return contains(categorical_columns, column); }
bool DatasetSchema::is_dropped(const std::string& column) const { return contains(dropped_columns, column); }

const DatasetSchema& schema_for(DatasetName name) {
    static const DatasetSchema kNsl = nsl_kdd();
    static const DatasetSchema kUnsw = unsw_nb15();
    static const DatasetSchema kCic = cicids2017();
    static const DatasetSchema kBot = bot_iot();
    static const DatasetSchema kTri = tri_ids();
    switch (name) {
        case DatasetName::NSL_KDD: return kNsl;
        case DatasetName::UNSW_NB15: return kUnsw;
        case DatasetName::CICIDS2017: return kCic;
        case DatasetName::BOT_IOT: return kBot;
        case DatasetName::TRI_IDS: return kTri;
    }
    throw Error(ErrorKind::UnsupportedKind, "unknown dataset");
}

std::string_view to_string(DatasetName name) {
    switch (name) {
        case DatasetName::UNSW_NB15: return "UNSW_NB15";
        case DatasetName::NSL_KDD: return "NSL_KDD";
        case DatasetName::CICIDS2017: return "CICIDS2017";
        case DatasetName::TRI_IDS: return "TRI_IDS";
        case DatasetName::BOT_IOT: return "BOT_IOT";
    }
    return "?";
}

DatasetName parse_dataset_name(std::string_view text) {
    std::string key;
    for (char c : text)
        if (std::isalnum(static_cast<unsigned char>(c))) key += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (key == "UNSWNB15") return DatasetName::UNSW_NB15;
    if (key == "NSLKDD") return DatasetName::NSL_KDD;
    if (key == "CICIDS2017") return DatasetName::CICIDS2017;
    if (key == "TRIIDS") return DatasetName::TRI_IDS;
    if (key == "BOTIOT") return DatasetName::BOT_IOT;
    throw Error(ErrorKind::ConfigParse, "unknown dataset '" + std::string(text) + "'");
}

}  // namespace kanids
