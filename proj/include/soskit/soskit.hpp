#pragma once

#include "soskit/body_part.hpp"
#include "soskit/bvh.hpp"
#include "soskit/error.hpp"
#include "soskit/motion_json.hpp"
#include "soskit/optimizer.hpp"
#include "soskit/orientation.hpp"
#include "soskit/periodic.hpp"
#include "soskit/quantizer.hpp"
#include "soskit/rotation.hpp"
#include "soskit/saliency.hpp"
#include "soskit/skeleton.hpp"
#include "soskit/sos_script.hpp"
#include "soskit/service.hpp"
#include "soskit/staff_svg.hpp"
