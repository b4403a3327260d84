struct Point {
  int x;
  int y;
  Point(int px, int py) : x(px), y(py) {}
};
struct Pixel : Point {
  int color;
  Pixel(int px, int py, int c) : Point(px, py), color(c) {}
};
int main() {
  Pixel p(3, 4, 7);
  assert(p.x + p.y + p.color == 14);
  return 0;
}
