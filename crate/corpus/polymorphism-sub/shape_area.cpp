class Shape {
  public:
  virtual int area() { return 0; }
};
class Rect : public Shape {
  public:
  int w;
  int h;
  Rect(int a, int b) : w(a), h(b) {}
  int area() override { return w * h; }
};
class Square : public Rect {
  public:
  Square(int s) : Rect(s, s) {}
};
int main() {
  Shape *s1 = new Rect(2, 3);
  Shape *s2 = new Square(4);
  assert(s1->area() + s2->area() == 22);
  delete s1;
  delete s2;
  return 0;
}
