#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace egoact {

struct ConversionLog {
    int converted = 0;
    std::vector<std::string> skipped; // one line per skipped clip or record, with reason
};

// H2O-style tree:
//   label_split/action_{train,val,test}.txt   "id path action_label start_act end_act start_frame end_frame"
//   <path>/cam4/cam_intrinsics.txt            "fx fy cx cy width height"
//   <path>/cam4/hand_pose/<frame:06d>.txt     left flag, 21x3 xyz, right flag, 21x3 xyz (camera frame)
//   <path>/cam4/obj_pose/<frame:06d>.txt      object class, then xyz triples of box points
// Action labels and object classes are 1-based on disk; object class 0 means no object.
ConversionLog convert_h2o(const std::filesystem::path& src, const std::filesystem::path& out);

// FPHA-style tree:
//   data_split_action_recognition.txt         "Training N" / "Test N" blocks of "<subject>/<action>/<seq> <label>"
//   Hand_pose_annotation_v1/<subject>/<action>/<seq>/skeleton.txt
//                                             "frame x1 y1 z1 ... x21 y21 z21" in world millimetres
// Produces the one-hand layout with the right hand populated.
ConversionLog convert_fpha(const std::filesystem::path& src, const std::filesystem::path& out);

ConversionLog convert_dataset(const std::string& layout, const std::filesystem::path& src,
                              const std::filesystem::path& out);

} // namespace egoact
