struct Box {
  int v;
  Box(int x) : v(x) {}
};
int main() {
  Box a(5);
  Box b = a;
  b.v = 6;
  assert(a.v == b.v);
  return 0;
}
