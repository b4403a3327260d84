struct Node {
  int value;
  Node *next;
};
int main() {
  Node *n = new Node();
  n->next = 0;
  int v = n->next->value;
  delete n;
  return 0;
}
