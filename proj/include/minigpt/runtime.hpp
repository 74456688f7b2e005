#pragma once

namespace minigpt {

/// Keeps large activation buffers on the heap between training steps instead
/// of returning them to the OS and faulting them back in. No-op off glibc.
/// Call once at program start.
void tune_allocator();

}  // namespace minigpt
